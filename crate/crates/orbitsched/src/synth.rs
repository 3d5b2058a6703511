//! Hand-built and randomized micro-instances.
//!
//! These bypass orbit geometry entirely: opportunity times and pointing
//! directions are specified directly, which makes slew feasibility between
//! any two opportunities exactly the difference of their pointing angles.
//! Used by unit tests, the oracle-backed acceptance suite, and a few of the
//! runnable examples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::astro::{GeoPoint, PointingVector, Vec3};
use crate::scenario::{
    GroundStation, ImageRequest, LocationRef, Mode, Opportunity, OpportunityId, RequestId,
    Scenario, StationId,
};

/// One opportunity to synthesize. `angle_deg` positions the pointing
/// direction on a great circle, so the slew angle between two opportunities
/// is the absolute difference of their angles.
#[derive(Debug, Clone, Copy)]
pub struct SynthOpp {
    pub mode: Mode,
    pub location_idx: u32,
    pub t_s: f64,
    pub t_e: f64,
    pub reward: f64,
    pub angle_deg: f64,
}

impl SynthOpp {
    pub fn collect(image: u32, t_s: f64, t_e: f64, reward: f64, angle_deg: f64) -> Self {
        Self {
            mode: Mode::Collect,
            location_idx: image,
            t_s,
            t_e,
            reward,
            angle_deg,
        }
    }

    pub fn contact(station: u32, t_s: f64, t_e: f64, angle_deg: f64) -> Self {
        Self {
            mode: Mode::Contact,
            location_idx: station,
            t_s,
            t_e,
            reward: 0.0,
            angle_deg,
        }
    }
}

fn direction(angle_deg: f64) -> Vec3 {
    let a = angle_deg.to_radians();
    Vec3::new(a.cos(), a.sin(), 0.0)
}

/// Build a scenario from explicit opportunities, optionally emitting the
/// sun-point twin of every collect/contact (as window generation does).
pub fn build(specs: Vec<SynthOpp>, with_twins: bool) -> Scenario {
    // Request/station tables keyed by the dense location indices used in the
    // specs; reward comes from the first window of each image.
    let mut n_images = 0u32;
    let mut n_stations = 0u32;
    for s in &specs {
        match s.mode {
            Mode::Collect => n_images = n_images.max(s.location_idx + 1),
            Mode::Contact => n_stations = n_stations.max(s.location_idx + 1),
            Mode::Sunpoint => panic!("specify only collect/contact; twins are derived"),
        }
    }
    let mut rewards = vec![1.0; n_images as usize];
    for s in &specs {
        if s.mode == Mode::Collect {
            rewards[s.location_idx as usize] = s.reward;
        }
    }

    let mut raw: Vec<SynthOpp> = specs.clone();
    if with_twins {
        raw.extend(specs.iter().map(|s| SynthOpp {
            mode: Mode::Sunpoint,
            location_idx: 0,
            reward: 0.0,
            ..*s
        }));
    }
    raw.sort_by(|a, b| {
        let rank = |m: Mode| match m {
            Mode::Collect => 0,
            Mode::Contact => 1,
            Mode::Sunpoint => 2,
        };
        a.t_s
            .total_cmp(&b.t_s)
            .then(rank(a.mode).cmp(&rank(b.mode)))
            .then(a.t_e.total_cmp(&b.t_e))
            .then(a.location_idx.cmp(&b.location_idx))
    });

    let horizon = raw.iter().map(|s| s.t_e).fold(0.0, f64::max) + 10.0;
    let opportunities: Vec<Opportunity> = raw
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let location = match s.mode {
                Mode::Collect => Some(LocationRef::Request(RequestId(s.location_idx))),
                Mode::Contact => Some(LocationRef::Station(StationId(s.location_idx))),
                Mode::Sunpoint => None,
            };
            let reward = match s.mode {
                Mode::Collect => rewards[s.location_idx as usize],
                _ => 0.0,
            };
            let dir = direction(s.angle_deg);
            Opportunity {
                id: OpportunityId(i as u32),
                mode: s.mode,
                location,
                t_s: s.t_s,
                t_e: s.t_e,
                reward,
                pointing_start: PointingVector {
                    direction: dir,
                    t: s.t_s,
                },
                pointing_end: PointingVector {
                    direction: dir,
                    t: s.t_e,
                },
            }
        })
        .collect();

    let requests = (0..n_images)
        .map(|i| ImageRequest {
            id: RequestId(i),
            point: GeoPoint::new(0.0, (i as f64 * 0.5) % 180.0 - 90.0),
            reward: rewards[i as usize],
            duration_s: 30.0,
            max_off_nadir_deg: 55.0,
        })
        .collect();
    let stations = (0..n_stations)
        .map(|i| GroundStation {
            id: StationId(i),
            point: GeoPoint::new(60.0, (i as f64 * 2.0) % 180.0 - 90.0),
            min_elevation_deg: 5.0,
        })
        .collect();

    let mut scenario = Scenario::new(requests, stations, horizon);
    scenario.opportunities = opportunities;
    scenario.validate().expect("synthetic scenario is well-formed");
    scenario
}

/// Three collect windows over two images (image 0 twice), all mutually
/// slew-feasible, with sun-point twins.
pub fn two_feasible_collects() -> Scenario {
    build(
        vec![
            SynthOpp::collect(0, 100.0, 130.0, 1.0, 0.0),
            SynthOpp::collect(1, 200.0, 230.0, 1.0, 20.0),
            SynthOpp::collect(0, 300.0, 330.0, 1.0, 10.0),
        ],
        true,
    )
}

/// A single ground contact of the given duration (plus twin).
pub fn contact_instance(duration_s: f64) -> Scenario {
    build(vec![SynthOpp::contact(0, 50.0, 50.0 + duration_s, 0.0)], true)
}

/// Random primaries over `ceil(n/2)` images so some images repeat, rewards
/// on a quarter grid (exact in binary), angles spread enough that some slews
/// conflict.
pub fn random_instance(seed: u64, n_primaries: usize, span_s: f64, with_twins: bool) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_images = n_primaries.div_ceil(2).max(1) as u32;
    let mut image_rewards = std::collections::HashMap::new();
    let mut specs = Vec::with_capacity(n_primaries);
    let mut starts: Vec<f64> = (0..n_primaries)
        .map(|_| rng.gen_range(10.0..span_s))
        .collect();
    starts.sort_by(f64::total_cmp);
    for t_s in starts {
        let image = rng.gen_range(0..n_images);
        let reward = *image_rewards
            .entry(image)
            .or_insert_with(|| rng.gen_range(1..=8) as f64 * 0.25);
        let len = rng.gen_range(20.0..40.0);
        let angle = rng.gen_range(0.0..120.0);
        specs.push(SynthOpp::collect(image, t_s, t_s + len, reward, angle));
    }
    build(specs, with_twins)
}

/// Random primaries where every window images a distinct request, so chain
/// weight and distinct collect reward coincide.
pub fn random_distinct_instance(seed: u64, n_primaries: usize, span_s: f64, with_twins: bool) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<f64> = (0..n_primaries)
        .map(|_| rng.gen_range(10.0..span_s))
        .collect();
    starts.sort_by(f64::total_cmp);
    let specs = starts
        .into_iter()
        .enumerate()
        .map(|(i, t_s)| {
            let reward = rng.gen_range(1..=8) as f64 * 0.25;
            let len = rng.gen_range(20.0..40.0);
            let angle = rng.gen_range(0.0..120.0);
            SynthOpp::collect(i as u32, t_s, t_s + len, reward, angle)
        })
        .collect();
    build(specs, with_twins)
}

/// Random collect-only instance with a fixed image count, for the packing
/// and longest-path oracles.
pub fn random_collect_instance(seed: u64, n_opps: usize, n_images: u32, span_s: f64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut image_rewards = std::collections::HashMap::new();
    let mut starts: Vec<f64> = (0..n_opps).map(|_| rng.gen_range(0.0..span_s)).collect();
    starts.sort_by(f64::total_cmp);
    let specs = starts
        .into_iter()
        .map(|t_s| {
            let image = rng.gen_range(0..n_images);
            let reward = *image_rewards
                .entry(image)
                .or_insert_with(|| rng.gen_range(1..=8) as f64 * 0.25);
            let len = rng.gen_range(10.0..30.0);
            let angle = rng.gen_range(0.0..90.0);
            SynthOpp::collect(image, t_s, t_s + len, reward, angle)
        })
        .collect();
    build(specs, false)
}

/// Evenly spaced collects with gentle pointing drift: every consecutive slew
/// is feasible, so the action space stays saturated. Used for complexity
/// measurements.
pub fn spread_instance(n_primaries: usize, gap_s: f64) -> Scenario {
    let specs = (0..n_primaries)
        .map(|i| {
            let t_s = 50.0 + i as f64 * gap_s;
            let angle = 10.0 * ((i % 5) as f64);
            SynthOpp::collect(i as u32, t_s, t_s + 20.0, 1.0, angle)
        })
        .collect();
    build(specs, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_produces_valid_sorted_scenarios() {
        let s = random_instance(5, 8, 2000.0, true);
        s.validate().unwrap();
        assert_eq!(s.opportunities.len(), 16);
        let primaries = s
            .opportunities
            .iter()
            .filter(|o| o.mode == Mode::Collect)
            .count();
        assert_eq!(primaries, 8);
    }

    #[test]
    fn collect_only_instances_have_no_twins() {
        let s = random_collect_instance(9, 12, 5, 3000.0);
        assert!(s.opportunities.iter().all(|o| o.mode == Mode::Collect));
        assert_eq!(s.opportunities.len(), 12);
    }
}
