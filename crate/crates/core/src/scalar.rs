use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar the simulator is generic over.
///
/// Implemented for `f32` and `f64`. Random draws (phases, fading, noise)
/// are always generated in `f64` and converted once on the way in, so the
/// scalar choice only affects downstream arithmetic precision, never the
/// random sequences themselves.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Send + Sync + std::fmt::Debug + 'static
{
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 value representable in scalar type")
    }

    fn to64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
