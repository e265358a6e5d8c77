//! `isowave`: batch front end for wavelet pyramids, Riesz banks, phase
//! analysis and structure tensors.
//!
//! Exit codes: 0 success, 2 I/O, 3 invalid parameter, 4 inconsistent data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use isowave::frequency::{forward_dft, inverse_dft, is_hermitian, pad_to_levels};
use isowave::io::{self, load_pyramid, save_pyramid, NdfData};
use isowave::pyramid::{self, max_levels, max_levels_with_padding, HERMITIAN_TOLERANCE};
use isowave::riesz::{apply_riesz, generate_riesz_bank};
use isowave::tensor::{coherency, projection_image, structure_tensor};
use isowave::wavelet::{emit_profile, write_profile_csv, WaveletFunction, WaveletKind};
use isowave::{Error, RealImage};

#[derive(Parser)]
#[command(name = "isowave", version, about = "Isotropic wavelet pyramids, Riesz transforms and local phase")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct WaveletArgs {
    /// Mother wavelet: vow, held, simoncelli or shannon.
    #[arg(long, default_value = "simoncelli")]
    wavelet: String,
    /// Polynomial order of the held wavelet.
    #[arg(long, default_value_t = 0)]
    held_order: usize,
}

impl WaveletArgs {
    fn build(&self) -> Result<WaveletFunction, Error> {
        match self.wavelet.parse::<WaveletKind>()? {
            WaveletKind::Held => WaveletFunction::held(self.held_order),
            kind => Ok(WaveletFunction::from_kind(kind)),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Pgm,
    Ndf,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose an image into detail and approximation coefficients.
    Forward {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 1)]
        bands: usize,
    },
    /// Reconstruct an image from a coefficient manifest.
    Inverse {
        /// Path of manifest.json.
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Multi-scale monogenic phase analysis.
    Phase {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 1)]
        bands: usize,
        #[arg(long, default_value_t = 1.0)]
        k_sigmas: f64,
        /// Also write every per-band phase map as NDF into this directory.
        #[arg(long)]
        band_outdir: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Spatial-domain Riesz components of order N, one NDF file each.
    Riesz {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Structure tensor eigen-analysis of two or more channels.
    StructureTensor {
        /// Input channel; repeat for each channel.
        #[arg(short, long = "input", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 3)]
        radius: usize,
        #[arg(long)]
        outdir: PathBuf,
    },
    /// Sample the radial filter profiles as CSV.
    Profile {
        #[command(flatten)]
        wavelet: WaveletArgs,
        #[arg(long, default_value_t = 1)]
        bands: usize,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print dims, level limits and, for spectra, hermitian status.
    Info {
        #[arg(short, long)]
        input: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::Format { .. } => 2,
        Error::InvalidParameter { .. }
        | Error::LevelsOutOfRange { .. }
        | Error::InvalidShape { .. }
        | Error::IndexOutOfRange { .. } => 3,
        Error::Manifest(_) | Error::DimsMismatch { .. } | Error::LayoutMismatch { .. } => 4,
    }
}

/// Files written by the current command; removed unless committed.
#[derive(Default)]
struct Outputs {
    paths: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn real(&mut self, path: PathBuf, image: &RealImage, format: Format) -> Result<(), Error> {
        match format {
            Format::Ndf => io::write_ndf_real(&path, image)?,
            Format::Pgm => io::write_pgm(&path, image)?,
        }
        self.paths.push(path);
        Ok(())
    }

    fn bytes(&mut self, path: PathBuf, bytes: &[u8]) -> Result<(), Error> {
        io::write_atomic(&path, bytes)?;
        self.paths.push(path);
        Ok(())
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.committed {
            for path in &self.paths {
                let _ = fs::remove_file(path);
            }
        }
    }
}

fn read_image(path: &Path) -> Result<RealImage, Error> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"NDF1") {
        match io::ndf::decode(&bytes)? {
            NdfData::Real(img) => Ok(img),
            NdfData::Complex(_) => Err(Error::Format {
                format: "NDF",
                reason: format!("{} holds a spectrum, expected a real image", path.display()),
            }),
        }
    } else {
        io::pgm::decode(&bytes)
    }
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn output_format(path: &Path, explicit: Option<Format>) -> Format {
    explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("pgm") => Format::Pgm,
        _ => Format::Ndf,
    })
}

fn check_levels(dims: &[usize], levels: usize) -> Result<(), Error> {
    let max = max_levels_with_padding(dims);
    if levels == 0 || levels > max {
        return Err(Error::LevelsOutOfRange {
            requested: levels,
            max,
            dims: dims.to_vec(),
        });
    }
    Ok(())
}

fn check_bands(bands: usize) -> Result<(), Error> {
    if bands == 0 {
        return Err(Error::InvalidParameter {
            name: "bands",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

/// Linear map of `[min, max]` onto `[0, 255]`; constant images map to 0.
fn rescale_to_byte(image: &RealImage) -> RealImage {
    let (lo, hi) = image.range();
    if hi > lo {
        image.map(|v| (v - lo) / (hi - lo) * 255.0)
    } else {
        image.map(|_| 0.0)
    }
}

fn run(command: Command) -> Result<(), Error> {
    let mut out = Outputs::default();
    match command {
        Command::Forward {
            input,
            outdir,
            wavelet,
            levels,
            bands,
        } => {
            let wavelet = wavelet.build()?;
            check_bands(bands)?;
            let image = read_image(&input)?;
            check_levels(image.dims(), levels)?;
            let padded = pad_to_levels(&image, levels as u32)?;
            let coeffs = pyramid::forward(&forward_dft(&padded), levels, bands, &wavelet)?;
            create_dir(&outdir)?;
            let (_, written) = save_pyramid(&coeffs, &outdir, Some(image.dims().to_vec()))?;
            out.paths.extend(written);
        }
        Command::Inverse { input, output, format } => {
            let format = output_format(&output, format);
            let (coeffs, manifest) = load_pyramid(&input)?;
            let spectrum = pyramid::inverse(&coeffs)?;
            let mut image = inverse_dft(&spectrum)?.image;
            if let Some(dims) = &manifest.original_dims {
                image = image.crop(dims)?;
            }
            out.real(output, &image, format)?;
        }
        Command::Phase {
            input,
            output,
            wavelet,
            levels,
            bands,
            k_sigmas,
            band_outdir,
            format,
        } => {
            let wavelet = wavelet.build()?;
            check_bands(bands)?;
            if !(k_sigmas >= 0.0) || !k_sigmas.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "k-sigmas",
                    reason: format!("must be finite and ≥ 0, got {k_sigmas}"),
                });
            }
            let format = output_format(&output, format);
            let image = read_image(&input)?;
            check_levels(image.dims(), levels)?;
            if format == Format::Pgm && image.ndim() != 2 {
                return Err(Error::InvalidShape {
                    dims: image.dims().to_vec(),
                    reason: "PGM output needs a 2D image".into(),
                });
            }
            let analysis = isowave::phase::riesz_wavelet_phase_analysis(&image, &wavelet, levels, bands, k_sigmas)?;
            if let Some(dir) = band_outdir {
                create_dir(&dir)?;
                for band in &analysis.band_phases {
                    let name = format!("phase_s{}_h{}.ndf", band.level, band.band);
                    out.real(dir.join(name), &band.image, Format::Ndf)?;
                }
            }
            let result = match format {
                Format::Pgm => rescale_to_byte(&analysis.image),
                Format::Ndf => analysis.image,
            };
            out.real(output, &result, format)?;
        }
        Command::Riesz { input, order, outdir } => {
            let image = read_image(&input)?;
            let bank = generate_riesz_bank(order, image.dims())?;
            let components = apply_riesz(&bank, &forward_dft(&image))?;
            create_dir(&outdir)?;
            for (index, spectrum) in bank.indices().iter().zip(&components) {
                let path = outdir.join(format!("{}.ndf", index.file_stem()));
                out.real(path, &inverse_dft(spectrum)?.image, Format::Ndf)?;
            }
        }
        Command::StructureTensor {
            inputs,
            sigma,
            radius,
            outdir,
        } => {
            let images = inputs.iter().map(|p| read_image(p)).collect::<Result<Vec<_>, _>>()?;
            let field = structure_tensor(&images, sigma, radius)?;
            create_dir(&outdir)?;
            let n = field.channels();
            out.real(outdir.join("coherency.ndf"), &coherency(&field), Format::Ndf)?;
            out.real(outdir.join("projection.ndf"), &projection_image(&field, &images, n)?, Format::Ndf)?;
            for rank in 1..=n {
                let values: Vec<f64> = (0..field.len()).map(|i| field.eigenvalues(i)[rank - 1]).collect();
                let img = RealImage::new(field.dims().to_vec(), values)?;
                out.real(outdir.join(format!("eigenvalue_{rank}.ndf")), &img, Format::Ndf)?;
            }
            for c in 0..n {
                let values: Vec<f64> = (0..field.len()).map(|i| field.eigenvector(i, n)[c]).collect();
                let img = RealImage::new(field.dims().to_vec(), values)?;
                out.real(outdir.join(format!("direction_{}.ndf", c + 1)), &img, Format::Ndf)?;
            }
        }
        Command::Profile {
            wavelet,
            bands,
            samples,
            output,
        } => {
            let rows = emit_profile(&wavelet.build()?, bands, samples)?;
            let mut csv = Vec::new();
            write_profile_csv(&rows, &mut csv).expect("writing to memory");
            out.bytes(output, &csv)?;
        }
        Command::Info { input } => {
            let bytes = fs::read(&input).map_err(|source| Error::Io {
                path: input.clone(),
                source,
            })?;
            if bytes.starts_with(b"NDF1") {
                match io::ndf::decode(&bytes)? {
                    NdfData::Real(img) => print_image_info(&img),
                    NdfData::Complex(spec) => {
                        println!("kind: spectrum");
                        println!("dims: {:?}", spec.dims());
                        println!("layout: {:?}", spec.layout());
                        println!("max levels: {}", max_levels(spec.dims()));
                        let hermitian = is_hermitian(&spec, HERMITIAN_TOLERANCE);
                        println!("hermitian: {}", if hermitian { "yes" } else { "no" });
                    }
                }
            } else {
                print_image_info(&io::pgm::decode(&bytes)?);
            }
        }
    }
    out.commit();
    Ok(())
}

fn print_image_info(image: &RealImage) {
    let (lo, hi) = image.range();
    println!("kind: image");
    println!("dims: {:?}", image.dims());
    println!("range: {lo} .. {hi}");
    println!("max levels: {}", max_levels(image.dims()));
    println!("max levels with padding: {}", max_levels_with_padding(image.dims()));
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("ISOWAVE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| Error::InvalidParameter {
        name: "ISOWAVE_THREADS",
        reason: format!("`{value}` is not a nonnegative integer"),
    })?;
    // 0 keeps the automatic choice; a second initialization is harmless to ignore
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
