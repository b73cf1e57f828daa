//! `mkabe`: command-line front end for the master-key ABE toolkit.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid input, 3 policy not
//! satisfied, 4 integrity failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use mkabe_core::abe::{self, AbeError};
use mkabe_core::crypto::{random_scalar, GroupParams, HashPrf};
use mkabe_core::formula::parse;
use mkabe_core::games::{
    self, run_m_ddh, run_m_prf, run_selective_id, run_selective_set, AbeGameConfig, GameResult,
    SsGameConfig,
};
use mkabe_core::sss_standard::{reconstruct_standard, share_standard, SsError};
use mkabe_core::AttributeId;

use mkabe_cli::formats::{self, FormatError};

#[derive(Parser)]
#[command(name = "mkabe", version, about = "Attribute-based encryption over monotone formulas")]
struct Cli {
    /// Hex seed; when given, the run is fully deterministic.
    #[arg(long, global = true, value_name = "HEX")]
    seed: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate group parameters with a modulus of roughly N bits.
    Params {
        #[arg(long, default_value_t = 32)]
        n: u32,
        #[arg(long, default_value = "params.json")]
        out: PathBuf,
    },
    /// Generate one key file per attribute plus a public-params file.
    Keygen {
        #[arg(long, default_value = "params.json")]
        params: PathBuf,
        /// Comma-separated attribute names.
        #[arg(long, value_delimiter = ',', required = true)]
        attrs: Vec<String>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Encrypt a message under a policy formula.
    Encrypt {
        #[arg(long, default_value = "publicparams.json")]
        pubparams: PathBuf,
        #[arg(long)]
        policy: String,
        /// Decimal scalar in core mode; arbitrary text in hybrid mode.
        #[arg(long)]
        message: String,
        /// Encrypt arbitrary bytes with a keystream derived from the scalar.
        #[arg(long)]
        hybrid: bool,
        /// Disable the integrity tag.
        #[arg(long)]
        no_integrity: bool,
        #[arg(long, default_value = "ciphertext.json")]
        out: PathBuf,
    },
    /// Decrypt a ciphertext with the given key files.
    Decrypt {
        #[arg(long, default_value = "ciphertext.json")]
        ciphertext: PathBuf,
        /// Comma-separated key file paths.
        #[arg(long, value_delimiter = ',', required = true)]
        keys: Vec<PathBuf>,
    },
    /// Split a secret according to a formula (standard scheme).
    Share {
        #[arg(long)]
        formula: String,
        /// Decimal secret.
        #[arg(long)]
        secret: String,
        /// Decimal prime modulus.
        #[arg(long)]
        q: String,
        #[arg(long, default_value = "sharing.json")]
        out: PathBuf,
    },
    /// Reconstruct a shared secret from a sharing file.
    Reconstruct {
        #[arg(long, default_value = "sharing.json")]
        sharing: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        attrs: Vec<String>,
    },
    /// Print each variable leaf of a formula as `attr,j,addr`.
    Inspect {
        formula: String,
    },
    /// Run a security game and print the report as JSON.
    Game {
        #[arg(value_enum)]
        name: GameName,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Adversary::Coinflip)]
        adversary: Adversary,
        /// Number of parallel oracle instances in m-PRF and m-DDH.
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Use the toy group (p=11, q=5) instead of the test group.
        #[arg(long)]
        tiny: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GameName {
    SelectiveId,
    SelectiveSet,
    MPrf,
    MDdh,
}

#[derive(Clone, Copy, ValueEnum)]
enum Adversary {
    Coinflip,
    /// All keys are leaked to the adversary (harness sanity mode).
    Omniscient,
    /// m-PRF distinguisher against the constant-zero stub.
    ZeroDetector,
    /// m-DDH brute-force discrete-log distinguisher (toy groups only).
    Dlog,
}

enum CliError {
    Input(String),
    NotSatisfied,
    IntegrityFailure,
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NotSatisfied => 3,
            CliError::IntegrityFailure => 4,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Internal(m) => m,
            CliError::NotSatisfied => "attribute set does not satisfy the policy",
            CliError::IntegrityFailure => "integrity check failed",
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AbeError> for CliError {
    fn from(e: AbeError) -> Self {
        match e {
            AbeError::NotSatisfied => CliError::NotSatisfied,
            AbeError::IntegrityFailure => CliError::IntegrityFailure,
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let seed_bytes = match &cli.seed {
        Some(hex_str) => Some(
            hex::decode(hex_str)
                .map_err(|e| CliError::Input(format!("--seed: {e}")))?,
        ),
        None => None,
    };
    let mut rng = match &seed_bytes {
        Some(bytes) => {
            let mut h = Sha256::new();
            h.update(b"mkabe.cli");
            h.update(bytes);
            rand_chacha::ChaCha20Rng::from_seed(h.finalize().into())
        }
        None => rand_chacha::ChaCha20Rng::from_entropy(),
    };
    let seed_for_report = seed_bytes.clone().unwrap_or_default();

    match cli.command {
        Command::Params { n, out } => {
            let derive_seed: Vec<u8> = match &seed_bytes {
                Some(b) => b.clone(),
                None => {
                    let mut b = vec![0u8; 32];
                    rng.fill_bytes(&mut b);
                    b
                }
            };
            let group = GroupParams::generate(n, &derive_seed)
                .map_err(|e| CliError::Input(e.to_string()))?;
            write_file(&out, &formats::params_to_json(&group))?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Keygen { params, attrs, out_dir } => {
            let group = formats::params_from_json(&read_file(&params)?)?;
            let attrs = parse_attrs(&attrs)?;
            let (keypairs, pp) = abe::setup(&attrs, &group, &mut rng)
                .map_err(|e| CliError::Input(e.to_string()))?;
            for kp in &keypairs {
                let path = out_dir.join(format!("{}.key.json", kp.attr.as_str()));
                write_file(&path, &formats::key_to_json(&kp.attr, &kp.sk, kp.pk.value()))?;
                println!("{}", path.display());
            }
            let pp_path = out_dir.join("publicparams.json");
            write_file(&pp_path, &formats::public_params_to_json(&pp))?;
            println!("{}", pp_path.display());
            Ok(())
        }
        Command::Encrypt { pubparams, policy, message, hybrid, no_integrity, out } => {
            let pp = formats::public_params_from_json(&read_file(&pubparams)?)?;
            let f = parse(&policy).map_err(|e| CliError::Input(e.to_string()))?;
            let q = pp.group.q();
            let with_tag = !no_integrity;
            let (m, payload) = if hybrid {
                // The scalar is a random key; the payload rides a keystream
                // derived from it.
                let m = random_scalar(&mut rng, q);
                let mut body = message.into_bytes();
                apply_keystream(&m, q, &mut body);
                (m, Some(body))
            } else {
                let m = formats::from_dec("--message", &message)?;
                if &m >= q {
                    return Err(CliError::Input("--message: scalar out of range".into()));
                }
                (m, None)
            };
            let ct = abe::encrypt(&m, &pp, &f, &mut rng, &HashPrf, with_tag)?;
            write_file(&out, &formats::ciphertext_to_json(&ct, &pp.group, payload.as_deref()))?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Decrypt { ciphertext, keys } => {
            let file = formats::ciphertext_from_json(&read_file(&ciphertext)?)?;
            let mut sks = BTreeMap::new();
            let mut pks = BTreeMap::new();
            for path in &keys {
                let key = formats::key_from_json(&read_file(path)?)?;
                let pk = file
                    .group
                    .element(key.pk)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                sks.insert(key.attr.clone(), key.sk);
                pks.insert(key.attr, pk);
            }
            let attrs: BTreeSet<AttributeId> = sks.keys().cloned().collect();
            let pp = abe::PublicParams { group: file.group, pks };
            let m = abe::decrypt(&file.ciphertext, &sks, &attrs, &pp, &HashPrf)?;
            match file.payload {
                Some(mut body) => {
                    apply_keystream(&m, pp.group.q(), &mut body);
                    let text = String::from_utf8(body)
                        .map_err(|_| CliError::Internal("payload is not UTF-8".into()))?;
                    println!("{text}");
                }
                None => println!("{}", formats::to_dec(&m)),
            }
            Ok(())
        }
        Command::Share { formula, secret, q, out } => {
            let f = parse(&formula).map_err(|e| CliError::Input(e.to_string()))?;
            let q = formats::from_dec("--q", &q)?;
            if !mkabe_core::crypto::is_prime(&q) {
                return Err(CliError::Input("--q: modulus must be prime".into()));
            }
            let s = formats::from_dec("--secret", &secret)?;
            if s >= q {
                return Err(CliError::Input("--secret: out of range".into()));
            }
            let sharing = share_standard(&s, &f, &q, &mut rng);
            write_file(&out, &formats::sharing_to_json(&sharing))?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Reconstruct { sharing, attrs } => {
            let sharing = formats::sharing_from_json(&read_file(&sharing)?)?;
            let attrs: BTreeSet<AttributeId> = parse_attrs(&attrs)?.into_iter().collect();
            match reconstruct_standard(&sharing, &attrs) {
                Ok(s) => {
                    println!("{}", formats::to_dec(&s));
                    Ok(())
                }
                Err(SsError::NotSatisfied) => Err(CliError::NotSatisfied),
                Err(e) => Err(CliError::Input(e.to_string())),
            }
        }
        Command::Inspect { formula } => {
            let f = parse(&formula).map_err(|e| CliError::Input(e.to_string()))?;
            for leaf in f.var_leaves() {
                println!("{},{},{}", leaf.attr.as_str(), leaf.occurrence, leaf.address);
            }
            Ok(())
        }
        Command::Game { name, trials, adversary, m, tiny } => {
            if trials == 0 {
                return Err(CliError::Input("--trials must be at least 1".into()));
            }
            let result = run_game(name, trials, adversary, m, tiny, &mut rng)?;
            let label = match name {
                GameName::SelectiveId => "selective-id",
                GameName::SelectiveSet => "selective-set",
                GameName::MPrf => "m-prf",
                GameName::MDdh => "m-ddh",
            };
            println!("{}", formats::game_report_to_json(label, &result, &seed_for_report));
            Ok(())
        }
    }
}

fn run_game(
    name: GameName,
    trials: u64,
    adversary: Adversary,
    m: usize,
    tiny: bool,
    rng: &mut rand_chacha::ChaCha20Rng,
) -> Result<GameResult, CliError> {
    let group = if tiny {
        GroupParams::new(BigUint::from(11u32), BigUint::from(5u32), BigUint::from(3u32), 2)
    } else {
        GroupParams::new(BigUint::from(2039u32), BigUint::from(1019u32), BigUint::from(4u32), 9)
    }
    .expect("built-in parameters are valid");
    let bad = |what: &str| {
        Err(CliError::Input(format!("--adversary {what} does not apply to this game")))
    };
    match name {
        GameName::SelectiveId => {
            let leak = matches!(adversary, Adversary::Omniscient);
            let cfg = SsGameConfig { q: group.q().clone(), leak_all_keys: leak };
            let mut adv: Box<dyn games::SsAdversary> = match adversary {
                Adversary::Coinflip => Box::new(games::CoinFlipSs),
                Adversary::Omniscient => Box::new(games::OmniscientSs::default()),
                Adversary::ZeroDetector => return bad("zero-detector"),
                Adversary::Dlog => return bad("dlog"),
            };
            run_selective_id(adv.as_mut(), &cfg, &HashPrf, trials, rng)
                .map_err(|e| CliError::Input(e.to_string()))
        }
        GameName::SelectiveSet => {
            let leak = matches!(adversary, Adversary::Omniscient);
            let cfg = AbeGameConfig { group, leak_all_keys: leak };
            let mut adv: Box<dyn games::AbeAdversary> = match adversary {
                Adversary::Coinflip => Box::new(games::CoinFlipAbe),
                Adversary::Omniscient => Box::new(games::OmniscientAbe::default()),
                Adversary::ZeroDetector => return bad("zero-detector"),
                Adversary::Dlog => return bad("dlog"),
            };
            run_selective_set(adv.as_mut(), &cfg, &HashPrf, trials, rng)
                .map_err(|e| CliError::Input(e.to_string()))
        }
        GameName::MPrf => match adversary {
            Adversary::Coinflip => Ok(run_m_prf(
                &mut games::CoinFlipPrfDistinguisher,
                &HashPrf,
                m,
                group.q(),
                trials,
                rng,
            )),
            Adversary::ZeroDetector => Ok(run_m_prf(
                &mut games::ZeroDetectorDistinguisher,
                &mkabe_core::crypto::ZeroPrf,
                m,
                group.q(),
                trials,
                rng,
            )),
            Adversary::Omniscient => bad("omniscient"),
            Adversary::Dlog => bad("dlog"),
        },
        GameName::MDdh => match adversary {
            Adversary::Coinflip => {
                Ok(run_m_ddh(&mut games::CoinFlipDdhDistinguisher, &group, m, trials, rng))
            }
            Adversary::Dlog => {
                if !tiny {
                    return Err(CliError::Input(
                        "--adversary dlog needs --tiny (brute force)".into(),
                    ));
                }
                Ok(run_m_ddh(&mut games::DlogDdhDistinguisher, &group, m, trials, rng))
            }
            Adversary::Omniscient => bad("omniscient"),
            Adversary::ZeroDetector => bad("zero-detector"),
        },
    }
}

/// XORs the buffer with a keystream bound to the scalar; applying it twice
/// restores the input.
fn apply_keystream(m: &BigUint, q: &BigUint, buf: &mut [u8]) {
    let key = formats::scalar_stream_key(m, q);
    let mut h = Sha256::new();
    h.update(b"mkabe.stream");
    h.update(key.as_bytes());
    let mut stream = rand_chacha::ChaCha20Rng::from_seed(h.finalize().into());
    let mut pad = vec![0u8; buf.len()];
    stream.fill_bytes(&mut pad);
    for (b, p) in buf.iter_mut().zip(&pad) {
        *b ^= p;
    }
}

fn parse_attrs(names: &[String]) -> Result<Vec<AttributeId>, CliError> {
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        out.push(AttributeId::new(name).map_err(|e| CliError::Input(e.to_string()))?);
    }
    Ok(out)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}
