use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use super::files::{check_database, read_database};
use super::NetError;
use crate::cauchy::{build_cauchy, default_matrix, CauchyMatrix};
use crate::protocol::{merge_depth, Database, ProtocolParams};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyPoints {
    pub x: Vec<u32>,
    pub y: Vec<u32>,
}

/// Server configuration, read from TOML:
///
/// ```toml
/// k = 12
/// side = 2
/// q = 17          # optional; omitted means a verified default matrix
/// symbols = 1     # optional, default 1
/// database = "db.bin"
///
/// [cauchy]        # optional explicit points, requires q
/// x = [5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16]
/// y = [0, 1, 2, 3, 4]
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub k: usize,
    pub side: usize,
    #[serde(default)]
    pub l: Option<usize>,
    #[serde(default)]
    pub q: Option<u64>,
    #[serde(default = "one")]
    pub symbols: usize,
    pub database: PathBuf,
    #[serde(default)]
    pub cauchy: Option<CauchyPoints>,
}

fn one() -> usize {
    1
}

impl SessionConfig {
    pub fn parse(text: &str) -> Result<Self, NetError> {
        toml::from_str(text).map_err(|e| NetError::Config(e.to_string()))
    }

    /// Reads a config file; a relative database path is taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, NetError> {
        let text = fs::read_to_string(path)?;
        let mut config = Self::parse(&text)?;
        if config.database.is_relative() {
            if let Some(dir) = path.parent() {
                config.database = dir.join(&config.database);
            }
        }
        Ok(config)
    }

    /// The Cauchy matrix this configuration describes.
    pub fn cauchy(&self) -> Result<Arc<CauchyMatrix>, NetError> {
        let l = merge_depth(self.k, self.side).ok_or_else(|| {
            NetError::Config(format!(
                "K = {} and M = {} do not fit K = (M+1) 2^l",
                self.k, self.side
            ))
        })?;
        if let Some(want) = self.l {
            if want != l {
                return Err(NetError::Config(format!(
                    "l = {want}, but K and M give l = {l}"
                )));
            }
        }
        Ok(match (self.q, &self.cauchy) {
            (None, None) => default_matrix(self.k, self.side, l)?,
            (None, Some(_)) => {
                return Err(NetError::Config("explicit Cauchy points need q".into()))
            }
            (Some(q), None) => Arc::new(build_cauchy(q, self.k, self.side, l)?),
            (Some(q), Some(p)) => {
                let field = crate::field::PrimeField::new(q)
                    .map_err(|e| NetError::Config(e.to_string()))?;
                Arc::new(CauchyMatrix::from_points_for(
                    field,
                    self.k,
                    self.side,
                    l,
                    p.x.clone(),
                    p.y.clone(),
                )?)
            }
        })
    }

    /// Parameters, Cauchy matrix and database, checked against each other.
    pub fn resolve(&self) -> Result<(ProtocolParams, Arc<CauchyMatrix>, Arc<Database>), NetError> {
        let cauchy = self.cauchy()?;
        let params = ProtocolParams::new(
            self.k,
            self.side,
            cauchy.field().modulus().into(),
            self.symbols,
        )?;
        let db = read_database(&mut fs::File::open(&self.database)?)?;
        check_database(&db, &params)?;
        Ok((params, cauchy, Arc::new(db)))
    }
}
