use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::SegmentState;
use crate::error::{Error, Result};

/// Bounds for the randomized sampler; each field is an inclusive `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomizedBounds {
    pub iri: (f64, f64),
    pub rd: (f64, f64),
    pub age_years: (f64, f64),
}

/// Initial-state distribution of an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStateSampler {
    /// Uniform over a fixed set of segments.
    Fleet { segments: Vec<SegmentState> },
    /// A template segment with indicators and age drawn uniformly.
    Randomized { template: SegmentState, bounds: RandomizedBounds },
}

impl InitialStateSampler {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialStateSampler::Fleet { segments } => {
                if segments.is_empty() {
                    return Err(Error::config("initial-state fleet is empty"));
                }
                segments.iter().try_for_each(SegmentState::validate)
            }
            InitialStateSampler::Randomized { template, bounds } => {
                template.validate()?;
                let ordered = |(lo, hi): (f64, f64)| lo <= hi && lo.is_finite() && hi.is_finite();
                if !ordered(bounds.iri) || !ordered(bounds.rd) || !ordered(bounds.age_years) {
                    return Err(Error::config("randomized bounds must be finite with lo <= hi"));
                }
                if bounds.iri.0 <= 0.0 || bounds.rd.0 < 0.0 || bounds.age_years.0 < 0.0 {
                    return Err(Error::config("randomized bounds must describe valid states"));
                }
                Ok(())
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SegmentState> {
        match self {
            InitialStateSampler::Fleet { segments } => {
                if segments.is_empty() {
                    return Err(Error::config("initial-state fleet is empty"));
                }
                Ok(segments[rng.gen_range(0..segments.len())])
            }
            InitialStateSampler::Randomized { template, bounds } => {
                let draw = |rng: &mut R, (lo, hi): (f64, f64)| if lo < hi { rng.gen_range(lo..=hi) } else { lo };
                let mut s = *template;
                s.iri = draw(rng, bounds.iri);
                s.rd = draw(rng, bounds.rd);
                s.age_years = draw(rng, bounds.age_years);
                Ok(s)
            }
        }
    }
}

/// Draws an initial state; the same seed always gives the same state.
pub fn reset(sampler: &InitialStateSampler, seed: u64) -> Result<SegmentState> {
    sampler.sample(&mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::segment;
    use alloc::vec;

    #[test]
    fn fleet_is_deterministic_per_seed() {
        let fleet = InitialStateSampler::Fleet {
            segments: (0..5).map(|i| segment(1.0 + i as f64 * 0.1, 2.0)).collect(),
        };
        for seed in 0..20 {
            assert_eq!(reset(&fleet, seed).unwrap(), reset(&fleet, seed).unwrap());
        }
    }

    #[test]
    fn empty_fleet_is_a_config_error() {
        let fleet = InitialStateSampler::Fleet { segments: vec![] };
        assert!(matches!(reset(&fleet, 0), Err(Error::Config(_))));
        assert!(fleet.validate().is_err());
    }

    #[test]
    fn randomized_draws_stay_in_bounds() {
        let sampler = InitialStateSampler::Randomized {
            template: segment(1.0, 2.0),
            bounds: RandomizedBounds {
                iri: (0.8, 1.2),
                rd: (1.0, 4.0),
                age_years: (0.0, 5.0),
            },
        };
        sampler.validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let s = sampler.sample(&mut rng).unwrap();
            assert!((0.8..=1.2).contains(&s.iri));
            assert!((1.0..=4.0).contains(&s.rd));
            assert!((0.0..=5.0).contains(&s.age_years));
        }
    }
}
