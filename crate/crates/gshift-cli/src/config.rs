use std::path::{Path, PathBuf};

use gshift::kvfile::KvFile;
use gshift::space::corpus;
use gshift::{Error, KernelSpec64, Resolution, Result, WeightParams64};
use sha2::{Digest, Sha256};

pub const ENV_CONFIG: &str = "GSHIFT_CONFIG";
const STAMP_FILE: &str = ".selftest_ok";
const MAX_N: usize = 256;

/// Parsed run configuration plus the loaded kernel spec and its
/// fingerprint.
pub struct RunContext {
    pub spec: KernelSpec64,
    /// SHA-256 of the kernel spec file bytes (or of the built-in canonical
    /// form when no file is referenced).
    pub fingerprint: String,
    pub w: WeightParams64,
    pub functions: Vec<String>,
    pub n_max: usize,
    pub deltas: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    pub res: Resolution,
    pub force: bool,
}

fn hash_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{:02x}", b)).collect()
}

impl RunContext {
    pub fn prepare(
        config_path: Option<&Path>,
        output_override: Option<&Path>,
        resolution_multiplier: Option<usize>,
        force: bool,
    ) -> Result<Self> {
        let env_path = std::env::var_os(ENV_CONFIG).map(PathBuf::from);
        let path = config_path.map(Path::to_path_buf).or(env_path);
        let (kv, base_dir) = match &path {
            Some(p) => {
                let kv = KvFile::load(p)
                    .map_err(|e| Error::Config(format!("{}: {}", p.display(), e)))?;
                let base = p.parent().unwrap_or(Path::new(".")).to_path_buf();
                (kv, base)
            }
            None => (KvFile::default(), PathBuf::from(".")),
        };
        for key in kv.keys() {
            const KNOWN: [&str; 11] = [
                "kernel_spec",
                "p",
                "alpha",
                "functions",
                "n_max",
                "deltas",
                "output_dir",
                "resolution.shift_nodes",
                "resolution.norm_nodes",
                "resolution.sup_samples",
                "resolution.fj_nodes",
            ];
            if !KNOWN.contains(&key) {
                return Err(Error::Config(format!("unknown config key {:?}", key)));
            }
        }

        let (spec, fingerprint) = match kv.get("kernel_spec") {
            Some(rel) => {
                let spec_path = base_dir.join(rel);
                let bytes = std::fs::read(&spec_path).map_err(|e| {
                    Error::Config(format!("kernel spec {}: {}", spec_path.display(), e))
                })?;
                let spec = KernelSpec64::parse(std::str::from_utf8(&bytes).map_err(|_| {
                    Error::Config(format!("kernel spec {} is not UTF-8", spec_path.display()))
                })?)?;
                (spec, hash_hex(&bytes))
            }
            None => {
                let spec = KernelSpec64::reference();
                let canonical = spec.to_config_string();
                (spec, hash_hex(canonical.as_bytes()))
            }
        };

        let p = kv.get_f64("p")?.unwrap_or(f64::INFINITY);
        let alpha = kv.get_f64("alpha")?.unwrap_or(1.0);
        let w = WeightParams64::new(p, alpha)
            .map_err(|e| Error::Config(format!("weight parameters: {}", e)))?;

        let all_labels: Vec<String> = corpus::<f64>()
            .iter()
            .map(|f| f.label().to_string())
            .collect();
        let functions: Vec<String> = match kv.get("functions") {
            None => all_labels.clone(),
            Some("all") => all_labels.clone(),
            Some(list) => {
                let mut out = Vec::new();
                for raw in list.split(',') {
                    let label = raw.trim().to_string();
                    if !all_labels.contains(&label) {
                        return Err(Error::Config(format!(
                            "unknown corpus label {:?}; known labels: {}",
                            label,
                            all_labels.join(", ")
                        )));
                    }
                    out.push(label);
                }
                out
            }
        };

        let n_max = kv.get_usize("n_max")?.unwrap_or(64);
        if !(2..=MAX_N).contains(&n_max) {
            return Err(Error::Config(format!(
                "n_max must lie in [2, {}], got {}",
                MAX_N, n_max
            )));
        }

        let deltas = match kv.get("deltas") {
            None => None,
            Some(list) => {
                let mut out = Vec::new();
                for raw in list.split(',') {
                    let v: f64 = raw.trim().parse().map_err(|_| {
                        Error::Config(format!("deltas: {:?} is not a number", raw.trim()))
                    })?;
                    out.push(v);
                }
                if out.windows(2).any(|p| !(p[0] < p[1])) || out.iter().any(|&d| d <= 0.0) {
                    return Err(Error::Config(
                        "deltas must be positive and strictly increasing".into(),
                    ));
                }
                Some(out)
            }
        };

        let default_res = Resolution::default();
        let res = Resolution {
            shift_nodes: kv
                .get_usize("resolution.shift_nodes")?
                .unwrap_or(default_res.shift_nodes),
            norm_nodes: kv
                .get_usize("resolution.norm_nodes")?
                .unwrap_or(default_res.norm_nodes),
            sup_samples: kv
                .get_usize("resolution.sup_samples")?
                .unwrap_or(default_res.sup_samples),
            fj_nodes: kv
                .get_usize("resolution.fj_nodes")?
                .unwrap_or(default_res.fj_nodes),
        }
        .scaled(resolution_multiplier.unwrap_or(1));

        let output_dir = output_override
            .map(Path::to_path_buf)
            .or_else(|| kv.get("output_dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("gshift-out"));
        std::fs::create_dir_all(&output_dir)
            .map_err(|e| Error::Config(format!("output dir {}: {}", output_dir.display(), e)))?;

        Ok(Self {
            spec,
            fingerprint,
            w,
            functions,
            n_max,
            deltas,
            output_dir,
            res,
            force,
        })
    }

    pub fn stamp_path(&self) -> PathBuf {
        self.output_dir.join(STAMP_FILE)
    }

    pub fn write_stamp(&self) -> Result<()> {
        std::fs::write(self.stamp_path(), format!("{}\n", self.fingerprint))?;
        Ok(())
    }

    /// The curves/verify commands require a passed self-test for this exact
    /// kernel spec (matched by fingerprint) unless --force is given.
    pub fn ensure_stamp(&self) -> Result<()> {
        if self.force {
            return Ok(());
        }
        match std::fs::read_to_string(self.stamp_path()) {
            Ok(text) if text.trim() == self.fingerprint => Ok(()),
            Ok(_) => Err(Error::Config(
                "self-test stamp belongs to a different kernel spec; rerun `gshift selftest` or pass --force".into(),
            )),
            Err(_) => Err(Error::Config(
                "no self-test stamp in the output directory; run `gshift selftest` first or pass --force".into(),
            )),
        }
    }
}
