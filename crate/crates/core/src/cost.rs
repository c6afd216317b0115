//! Scene-reset cost: total distance objects are moved between two scenes, and a
//! linear time proxy on top of it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EnvKind;

/// Position of one physical object, keyed by its identity across scenes.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub id: String,
    pub position: [f64; 2],
}

/// A concrete scene whose objects can be matched against another scene.
pub trait Layout {
    fn env_kind(&self) -> EnvKind;
    fn placements(&self) -> Vec<Placement>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SceneDiff {
    /// Meters.
    pub distance: f64,
    pub objects_touched: u32,
}

/// Per-object displacement between two scenes. Objects are matched by id;
/// unmatched objects are charged the environment's staging distance.
///
/// Objects are visited in sorted-id order so that `scene_diff(a, b)` and
/// `scene_diff(b, a)` are bit-identical.
pub fn scene_diff<A, B>(from: &A, to: &B) -> Result<SceneDiff>
where
    A: Layout + ?Sized,
    B: Layout + ?Sized,
{
    let kind = from.env_kind();
    if kind != to.env_kind() {
        return Err(Error::EnvMismatch {
            left: kind,
            right: to.env_kind(),
        });
    }
    let mut a = from.placements();
    let mut b = to.placements();
    a.sort_by(|x, y| x.id.cmp(&y.id));
    b.sort_by(|x, y| x.id.cmp(&y.id));
    let stage = kind.staging_distance();

    let mut diff = SceneDiff::default();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.id.cmp(&y.id),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, _) => std::cmp::Ordering::Greater,
        };
        match ord {
            std::cmp::Ordering::Equal => {
                let (p, q) = (a[i].position, b[j].position);
                let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                if d > 0.0 {
                    diff.distance += d;
                    diff.objects_touched += 1;
                }
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => {
                diff.distance += stage;
                diff.objects_touched += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                diff.distance += stage;
                diff.objects_touched += 1;
                j += 1;
            }
        }
    }
    Ok(diff)
}

/// Total distance (meters) objects move to turn `from` into `to`.
pub fn scene_diff_cost<A, B>(from: &A, to: &B) -> Result<f64>
where
    A: Layout + ?Sized,
    B: Layout + ?Sized,
{
    scene_diff(from, to).map(|d| d.distance)
}

/// Seconds to perform a reset: `a * distance + b * objects`.
pub fn time_proxy_cost(
    distance: f64,
    objects_touched: u32,
    seconds_per_meter: f64,
    seconds_per_object: f64,
) -> Result<f64> {
    if distance.is_nan() || distance < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "negative reset distance {distance}"
        )));
    }
    Ok(seconds_per_meter * distance + seconds_per_object * f64::from(objects_touched))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    DistanceMoved,
    TimeProxy {
        seconds_per_meter: f64,
        seconds_per_object: f64,
    },
}

impl CostModel {
    pub const DEFAULT_TIME_PROXY: CostModel = CostModel::TimeProxy {
        seconds_per_meter: 10.0,
        seconds_per_object: 5.0,
    };

    pub fn id(&self) -> &'static str {
        match self {
            CostModel::DistanceMoved => "distance_moved",
            CostModel::TimeProxy { .. } => "time_proxy",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CostModel::DistanceMoved => Ok(()),
            CostModel::TimeProxy {
                seconds_per_meter,
                seconds_per_object,
            } => {
                if seconds_per_meter > 0.0 && seconds_per_object >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(
                        "time proxy needs seconds_per_meter > 0 and seconds_per_object >= 0".into(),
                    ))
                }
            }
        }
    }

    pub fn apply(&self, diff: SceneDiff) -> Result<f64> {
        match *self {
            CostModel::DistanceMoved => {
                if diff.distance < 0.0 {
                    return Err(Error::InvalidArgument("negative reset distance".into()));
                }
                Ok(diff.distance)
            }
            CostModel::TimeProxy {
                seconds_per_meter,
                seconds_per_object,
            } => time_proxy_cost(
                diff.distance,
                diff.objects_touched,
                seconds_per_meter,
                seconds_per_object,
            ),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    #[derive(Clone, Debug)]
    pub struct Pts(pub EnvKind, pub Vec<(String, [f64; 2])>);

    impl Layout for Pts {
        fn env_kind(&self) -> EnvKind {
            self.0
        }
        fn placements(&self) -> Vec<Placement> {
            self.1
                .iter()
                .map(|(id, p)| Placement {
                    id: id.clone(),
                    position: *p,
                })
                .collect()
        }
    }

    fn pts(v: &[(&str, f64, f64)]) -> Pts {
        Pts(
            EnvKind::Tabletop,
            v.iter().map(|(i, x, y)| (i.to_string(), [*x, *y])).collect(),
        )
    }

    #[test]
    fn identical_scenes_cost_nothing() {
        let a = pts(&[("a", 0.1, 0.1), ("b", 0.3, 0.2)]);
        assert_eq!(scene_diff_cost(&a, &a).unwrap(), 0.0);
        assert_eq!(scene_diff(&a, &a).unwrap().objects_touched, 0);
    }

    #[test]
    fn single_block_move() {
        let a = pts(&[("a", 0.1, 0.1), ("b", 0.3, 0.2)]);
        let b = pts(&[("a", 0.1, 0.1), ("b", 0.4, 0.2)]);
        let d = scene_diff(&a, &b).unwrap();
        assert!((d.distance - 0.10).abs() < 1e-12);
        assert_eq!(d.objects_touched, 1);
    }

    #[test]
    fn unmatched_objects_pay_staging() {
        let a = pts(&[("a", 0.1, 0.1)]);
        let b = pts(&[("b", 0.1, 0.1)]);
        assert_eq!(scene_diff_cost(&a, &b).unwrap(), 2.0);
        let nav = Pts(EnvKind::Nav, vec![("lamp".into(), [1.0, 1.0])]);
        let empty = Pts(EnvKind::Nav, vec![]);
        assert_eq!(scene_diff_cost(&nav, &empty).unwrap(), 3.0);
    }

    #[test]
    fn mismatched_kinds_are_rejected() {
        let a = pts(&[]);
        let b = Pts(EnvKind::Nav, vec![]);
        assert!(matches!(
            scene_diff_cost(&a, &b),
            Err(Error::EnvMismatch { .. })
        ));
    }

    #[test]
    fn time_proxy_examples() {
        assert_eq!(time_proxy_cost(0.0, 0, 10.0, 5.0).unwrap(), 0.0);
        assert_eq!(time_proxy_cost(1.0, 1, 10.0, 5.0).unwrap(), 15.0);
        assert!(time_proxy_cost(-0.1, 0, 10.0, 5.0).is_err());
        assert!(time_proxy_cost(2.0, 1, 10.0, 5.0).unwrap() > time_proxy_cost(1.0, 1, 10.0, 5.0).unwrap());
    }

    fn arb_scene() -> impl Strategy<Value = Pts> {
        proptest::collection::btree_map(0u8..8, (0.0..0.6f64, 0.0..0.4f64), 0..6).prop_map(|m| {
            Pts(
                EnvKind::Tabletop,
                m.into_iter().map(|(k, (x, y))| (format!("o{k}"), [x, y])).collect(),
            )
        })
    }

    fn with_ids(ids: &[u8], coords: &[(f64, f64)]) -> Pts {
        Pts(
            EnvKind::Tabletop,
            ids.iter()
                .zip(coords)
                .map(|(k, (x, y))| (format!("o{k}"), [*x, *y]))
                .collect(),
        )
    }

    proptest! {
        #[test]
        fn diff_is_symmetric(a in arb_scene(), b in arb_scene()) {
            prop_assert_eq!(scene_diff(&a, &b).unwrap(), scene_diff(&b, &a).unwrap());
        }

        #[test]
        fn triangle_inequality_for_matched_scenes(
            c in proptest::collection::vec((0.0..0.6f64, 0.0..0.4f64, 0.0..0.6f64, 0.0..0.4f64, 0.0..0.6f64, 0.0..0.4f64), 1..6)
        ) {
            let ids: Vec<u8> = (0..c.len() as u8).collect();
            let a = with_ids(&ids, &c.iter().map(|t| (t.0, t.1)).collect::<Vec<_>>());
            let b = with_ids(&ids, &c.iter().map(|t| (t.2, t.3)).collect::<Vec<_>>());
            let d = with_ids(&ids, &c.iter().map(|t| (t.4, t.5)).collect::<Vec<_>>());
            let ac = scene_diff_cost(&a, &d).unwrap();
            let ab = scene_diff_cost(&a, &b).unwrap();
            let bc = scene_diff_cost(&b, &d).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }
}
