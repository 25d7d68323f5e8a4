use thiserror::Error;

/// Upper bound on the balance factor for which single and double rotations
/// always restore weight balance.
pub const MAX_ALPHA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("alpha must be in (0, {MAX_ALPHA:.4}], got {0}")]
    Alpha(f64),
    #[error("block size must be at least 1")]
    Block,
    #[error("kappa ({kappa}) must be at least twice the block size ({block})")]
    Kappa { kappa: usize, block: usize },
    #[error("grain must be at least 1")]
    Grain,
    #[error("block size {0} is too large")]
    BlockTooLarge(usize),
}

/// Tree parameters shared by every operation on one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    /// Weight-balance factor.
    pub alpha: f64,
    /// Leaf blocks hold `block..=2 * block` entries.
    pub block: usize,
    /// Bulk operations on inputs totalling fewer entries switch to a
    /// flatten-merge-rebuild base case.
    pub kappa: usize,
    /// Recursive branches fork in parallel above this many entries.
    pub grain: usize,
    /// Allow uniquely owned nodes to be taken apart and their allocations
    /// recycled instead of copied.
    pub reuse: bool,
}

impl Config {
    pub fn new(block: usize) -> Config {
        Config {
            alpha: 0.29,
            block,
            kappa: 8 * block,
            grain: 4 * block,
            reuse: true,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Config {
        self.alpha = alpha;
        self
    }

    pub fn with_kappa(mut self, kappa: usize) -> Config {
        self.kappa = kappa;
        self
    }

    pub fn with_grain(mut self, grain: usize) -> Config {
        self.grain = grain;
        self
    }

    pub fn with_reuse(mut self, reuse: bool) -> Config {
        self.reuse = reuse;
        self
    }

    pub fn validate(self) -> Result<Config, ConfigError> {
        if !(self.alpha > 0.0 && self.alpha <= MAX_ALPHA) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if self.block == 0 {
            return Err(ConfigError::Block);
        }
        if self.block > crate::node::MAX_TREE_SIZE / 4 {
            return Err(ConfigError::BlockTooLarge(self.block));
        }
        if self.kappa < 2 * self.block {
            return Err(ConfigError::Kappa {
                kappa: self.kappa,
                block: self.block,
            });
        }
        if self.grain == 0 {
            return Err(ConfigError::Grain);
        }
        Ok(self)
    }

    /// Whether `node(l, e, r)` with subtrees of these sizes is weight
    /// balanced: `alpha <= w(l) / (w(l) + w(r)) <= 1 - alpha`, `w = size + 1`.
    pub fn balanced(&self, left: usize, right: usize) -> bool {
        let wl = (left + 1) as f64;
        let wr = (right + 1) as f64;
        let w = wl + wr;
        self.alpha * w <= wl && self.alpha * w <= wr
    }

    /// Height bound `log_{1/(1-alpha)} w` for a tree of `size` entries.
    pub fn height_bound(&self, size: usize) -> f64 {
        ((size + 1) as f64).ln() / (1.0 / (1.0 - self.alpha)).ln()
    }
}

impl Default for Config {
    fn default() -> Self {
        Config::new(128)
    }
}
