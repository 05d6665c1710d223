use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("speed ratio must satisfy 0 <= nu < 1, got {0}")]
    SpeedRatio(f64),
    #[error("{name} must be {expect}, got {value}")]
    Domain {
        name: &'static str,
        expect: &'static str,
        value: f64,
    },
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    /// Pursuer and evader coincide, so the line of sight is undefined.
    #[error("degenerate state: pursuer and evader coincide")]
    Degenerate,
    /// The guaranteed law's steering vector vanished.
    #[error("singular pursuit policy: |z_P| = 0")]
    SingularPolicy,
    /// The Apollonius disc already reaches a wall; the game of kind is decided.
    #[error("Apollonius disc intersects a wall (d1 = {d1}, d2 = {d2})")]
    WallReached { d1: f64, d2: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
