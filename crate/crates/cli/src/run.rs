use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use wigner_kg::analytic::two_wave_wigner;
use wigner_kg::kg::{kg_dt_bound, kg_energy, kg_evolve, KGState};
use wigner_kg::swl::{advect_action, advect_dt_bound, extract_fg, wave_action, SWLFrame};
use wigner_kg::transport::{charge, evolve_transport, transport_dt_bound, SolverControls, TransportState};
use wigner_kg::{
    decompose_real, fv_split, w_phiphi, wigner_matrix, Grid, MediumProfile, PhaseSpaceDensities, SimParams, C64,
};

use crate::config::{Dt, Format, Quantity, RunConfig};
use crate::io::{save_bin, save_csv, Field, Table};
use crate::CliError;

const AUTO_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Wigner,
    EvolveWigner,
    EvolveKg,
    EvolveSwl,
    Compare,
    CaseTwoWave,
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub dt: Option<f64>,
    pub snapshots: usize,
}

struct Sink {
    dir: PathBuf,
    formats: Vec<Format>,
    files: Vec<PathBuf>,
}

impl Sink {
    fn new(dir: &Path, formats: &[Format]) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::config("output.dir", format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            formats: formats.to_vec(),
            files: Vec::new(),
        })
    }

    fn fail(&self, path: &Path, e: std::io::Error) -> CliError {
        CliError::config("output.dir", format!("{}: {e}", path.display()))
    }

    fn field(&mut self, stem: &str, f: &Field) -> Result<(), CliError> {
        for fmt in self.formats.clone() {
            let path = self.dir.join(format!("{stem}.{}", ext(fmt)));
            match fmt {
                Format::Csv => save_csv(f, &path),
                Format::Bin => save_bin(f, &path),
            }
            .map_err(|e| self.fail(&path, e))?;
            self.files.push(path);
        }
        Ok(())
    }

    fn table(&mut self, stem: &str, t: &Table) -> Result<(), CliError> {
        for fmt in self.formats.clone() {
            let path = self.dir.join(format!("{stem}.{}", ext(fmt)));
            match fmt {
                Format::Csv => fs::File::create(&path).and_then(|f| t.write_csv(std::io::BufWriter::new(f))),
                Format::Bin => save_bin(&t.to_field(), &path),
            }
            .map_err(|e| self.fail(&path, e))?;
            self.files.push(path);
        }
        Ok(())
    }
}

fn ext(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Bin => "bin",
    }
}

struct Setup {
    params: SimParams,
    grid: Grid,
    medium: MediumProfile,
}

impl Setup {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let params = cfg.sim_params()?;
        let grid = cfg.build_grid(&params)?;
        let medium = cfg.medium(&grid)?;
        Ok(Self { params, grid, medium })
    }

    fn phase(&self, a: &Array2<f64>) -> Field {
        Field::phase_space(a, self.grid.dr(), self.grid.dk())
    }

    fn densities(&self, phi: &[C64], dphi: &[C64], t: f64) -> Result<PhaseSpaceDensities, CliError> {
        let psi = fv_split(phi, dphi, &self.params)?;
        let mut d = decompose_real(&wigner_matrix(&psi, &self.grid, &self.params)?)?;
        d.t = t;
        Ok(d)
    }
}

/// Checks a configured step against `bound` (safety 1) or picks the automatic one.
fn pick_dt(dt: Dt, key: &str, bound: f64) -> Result<f64, CliError> {
    match dt {
        Dt::Auto => Ok(AUTO_SAFETY * bound),
        Dt::Fixed(v) if v <= bound => Ok(v),
        Dt::Fixed(v) => Err(CliError::config(
            key,
            format!("{v} exceeds the stability bound {bound}"),
        )),
    }
}

fn wants(cfg: &RunConfig, q: Quantity) -> bool {
    cfg.output.quantities.contains(&q)
}

fn write_densities(
    cfg: &RunConfig,
    s: &Setup,
    sink: &mut Sink,
    tag: &str,
    d: &PhaseSpaceDensities,
) -> Result<(), CliError> {
    for (q, a) in [
        (Quantity::W0, &d.w0),
        (Quantity::W1, &d.w1),
        (Quantity::W2, &d.w2),
        (Quantity::W3, &d.w3),
    ] {
        if wants(cfg, q) {
            sink.field(&format!("{}_{tag}", q.file_stem()), &s.phase(a))?;
        }
    }
    let need_frame = [Quantity::F, Quantity::G, Quantity::J, Quantity::Residuals]
        .iter()
        .any(|q| wants(cfg, *q));
    let wff = w_phiphi(d);
    if wants(cfg, Quantity::WPhiPhi) {
        sink.field(&format!("W_PhiPhi_{tag}"), &s.phase(&wff))?;
    }
    if need_frame {
        let frame = SWLFrame::new(&s.grid, &s.medium, &s.params, d.t)?;
        let (a, res) = extract_fg(d, &frame)?;
        if wants(cfg, Quantity::F) {
            sink.field(&format!("f_{tag}"), &s.phase(&a.f))?;
        }
        if wants(cfg, Quantity::G) {
            sink.field(&format!("g_{tag}"), &s.phase(&a.g))?;
        }
        if wants(cfg, Quantity::J) {
            sink.field(&format!("J_{tag}"), &s.phase(&wave_action(&wff, &frame, &s.params)?))?;
        }
        if wants(cfg, Quantity::Residuals) {
            sink.field(&format!("residuals_{tag}"), &s.phase(&res))?;
        }
    }
    Ok(())
}

/// `snapshot, t` plus whichever of `charge` and `energy` were requested.
struct Series {
    charge: bool,
    energy: bool,
    table: Table,
}

impl Series {
    fn new(cfg: &RunConfig, energy_available: bool) -> Self {
        let charge = wants(cfg, Quantity::Charge);
        let energy = energy_available && wants(cfg, Quantity::Energy);
        let mut cols = vec!["snapshot", "t"];
        if charge {
            cols.push("charge");
        }
        if energy {
            cols.push("energy");
        }
        Self {
            charge,
            energy,
            table: Table::new(&cols),
        }
    }

    fn push(
        &mut self,
        i: usize,
        t: f64,
        charge: impl FnOnce() -> f64,
        energy: impl FnOnce() -> Result<f64, CliError>,
    ) -> Result<(), CliError> {
        let mut row = vec![i as f64, t];
        if self.charge {
            row.push(charge());
        }
        if self.energy {
            row.push(energy()?);
        }
        self.table.push(row);
        Ok(())
    }

    fn write(&self, sink: &mut Sink) -> Result<(), CliError> {
        if self.charge || self.energy {
            sink.table("series", &self.table)?;
        }
        Ok(())
    }
}

pub fn run(cfg: &RunConfig, command: Command, out: &Path, formats: &[Format]) -> Result<RunSummary, CliError> {
    let s = Setup::new(cfg)?;
    let mut sink = Sink::new(out, formats)?;
    let mut summary = RunSummary::default();
    match command {
        Command::Wigner => {
            let (phi, dphi) = cfg.initial(&s.grid, &s.params)?;
            let d = s.densities(&phi, &dphi, 0.0)?;
            write_densities(cfg, &s, &mut sink, "0000", &d)?;
            let mut series = Series::new(cfg, true);
            let st = KGState::new(phi, dphi, 0.0);
            series.push(
                0,
                0.0,
                || charge(&d, &s.grid),
                || Ok(kg_energy(&st, &s.grid, &s.medium, &s.params)?),
            )?;
            series.write(&mut sink)?;
            summary.snapshots = 1;
        }
        Command::EvolveWigner => {
            let sc = cfg.solver()?;
            let dt = pick_dt(
                sc.dt()?,
                "solver.dt",
                transport_dt_bound(&s.grid, &s.medium, &s.params, 1.0)?,
            )?;
            let (phi, dphi) = cfg.initial(&s.grid, &s.params)?;
            let state = TransportState::new(s.densities(&phi, &dphi, 0.0)?);
            let controls = SolverControls::new(dt, sc.t_end).with_stride(sc.observer_stride);
            let traj = evolve_transport(&state, &s.grid, &s.medium, &s.params, &controls)?;
            let mut series = Series::new(cfg, false);
            for (i, st) in traj.iter().enumerate() {
                write_densities(cfg, &s, &mut sink, &format!("{i:04}"), &st.densities)?;
                series.push(i, st.t, || charge(&st.densities, &s.grid), || Ok(0.0))?;
            }
            series.write(&mut sink)?;
            summary.dt = Some(dt);
            summary.snapshots = traj.len();
        }
        Command::EvolveKg => {
            let sc = cfg.solver()?;
            let (dt_cfg, key) = sc.dt_kg()?;
            let dt = pick_dt(dt_cfg, key, kg_dt_bound(&s.grid, &s.medium, &s.params, 1.0)?)?;
            let (phi, dphi) = cfg.initial(&s.grid, &s.params)?;
            let controls = SolverControls::new(dt, sc.t_end).with_stride(sc.observer_stride);
            let traj = kg_evolve(&KGState::new(phi, dphi, 0.0), &s.grid, &s.medium, &s.params, &controls)?;
            let mut series = Series::new(cfg, true);
            for (i, st) in traj.iter().enumerate() {
                let d = s.densities(&st.phi, &st.dphi_dt, st.t)?;
                write_densities(cfg, &s, &mut sink, &format!("{i:04}"), &d)?;
                series.push(
                    i,
                    st.t,
                    || charge(&d, &s.grid),
                    || Ok(kg_energy(st, &s.grid, &s.medium, &s.params)?),
                )?;
            }
            series.write(&mut sink)?;
            summary.dt = Some(dt);
            summary.snapshots = traj.len();
        }
        Command::EvolveSwl => {
            let sc = cfg.solver()?;
            let law = cfg.swl.law();
            let dt = pick_dt(
                sc.dt()?,
                "solver.dt",
                advect_dt_bound(&s.grid, &s.medium, &s.params, law, 1.0)?,
            )?;
            let (phi, dphi) = cfg.initial(&s.grid, &s.params)?;
            let d0 = s.densities(&phi, &dphi, 0.0)?;
            let frame = SWLFrame::new(&s.grid, &s.medium, &s.params, 0.0)?;
            let (a0, res) = extract_fg(&d0, &frame)?;
            if wants(cfg, Quantity::Residuals) {
                sink.field("residuals_0000", &s.phase(&res))?;
            }
            let controls = SolverControls::new(dt, sc.t_end).with_stride(sc.observer_stride);
            let traj = advect_action(&a0, &s.grid, &s.medium, &s.params, &controls, law)?;
            let mut t = Table::new(&["snapshot", "t", "f_total", "g_total"]);
            for (i, a) in traj.iter().enumerate() {
                let tag = format!("{i:04}");
                if wants(cfg, Quantity::F) {
                    sink.field(&format!("f_{tag}"), &s.phase(&a.f))?;
                }
                if wants(cfg, Quantity::G) {
                    sink.field(&format!("g_{tag}"), &s.phase(&a.g))?;
                }
                if wants(cfg, Quantity::J) || wants(cfg, Quantity::WPhiPhi) {
                    let wff = w_phiphi(&a.to_densities(&frame));
                    if wants(cfg, Quantity::WPhiPhi) {
                        sink.field(&format!("W_PhiPhi_{tag}"), &s.phase(&wff))?;
                    }
                    if wants(cfg, Quantity::J) {
                        sink.field(&format!("J_{tag}"), &s.phase(&wave_action(&wff, &frame, &s.params)?))?;
                    }
                }
                let (f, g) = a.totals(&s.grid);
                t.push(vec![i as f64, a.t, f, g]);
            }
            sink.table("series", &t)?;
            summary.dt = Some(dt);
            summary.snapshots = traj.len();
        }
        Command::Compare => {
            // Both solvers share one step so their snapshots coincide in time.
            let sc = cfg.solver()?;
            let bound = transport_dt_bound(&s.grid, &s.medium, &s.params, 1.0)?
                .min(kg_dt_bound(&s.grid, &s.medium, &s.params, 1.0)?);
            let dt = pick_dt(sc.dt()?, "solver.dt", bound)?;
            let (phi, dphi) = cfg.initial(&s.grid, &s.params)?;
            let controls = SolverControls::new(dt, sc.t_end).with_stride(sc.observer_stride);
            let kg = kg_evolve(
                &KGState::new(phi.clone(), dphi.clone(), 0.0),
                &s.grid,
                &s.medium,
                &s.params,
                &controls,
            )?;
            let state = TransportState::new(s.densities(&phi, &dphi, 0.0)?);
            let tr = evolve_transport(&state, &s.grid, &s.medium, &s.params, &controls)?;
            let mut t = Table::new(&[
                "snapshot",
                "t",
                "l2_abs",
                "l2_rel",
                "charge_kg",
                "charge_wigner",
                "energy_kg",
            ]);
            let cell = s.grid.dr() * s.grid.dk();
            for (i, (a, b)) in kg.iter().zip(&tr).enumerate() {
                let dk = s.densities(&a.phi, &a.dphi_dt, a.t)?;
                let wk = w_phiphi(&dk);
                let wt = w_phiphi(&b.densities);
                let diff: f64 = wk.iter().zip(wt.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() * cell;
                let norm: f64 = wk.iter().map(|x| x * x).sum::<f64>() * cell;
                let e = kg_energy(a, &s.grid, &s.medium, &s.params)?;
                let rel = if norm > 0.0 { (diff / norm).sqrt() } else { 0.0 };
                t.push(vec![
                    i as f64,
                    a.t,
                    diff.sqrt(),
                    rel,
                    charge(&dk, &s.grid),
                    charge(&b.densities, &s.grid),
                    e,
                ]);
                if wants(cfg, Quantity::WPhiPhi) {
                    sink.field(&format!("W_PhiPhi_kg_{i:04}"), &s.phase(&wk))?;
                    sink.field(&format!("W_PhiPhi_wigner_{i:04}"), &s.phase(&wt))?;
                }
            }
            sink.table("compare_l2", &t)?;
            summary.dt = Some(dt);
            summary.snapshots = tr.len();
        }
        Command::CaseTwoWave => {
            let spec = cfg.case()?;
            let t_case = cfg.case.as_ref().map_or(0.0, |c| c.t);
            let (j0, j1, jm) = spec
                .nodes(&s.grid)
                .map_err(|e| CliError::config("case", e.to_string()))?;
            let d = two_wave_wigner(&spec, t_case, &s.grid, &s.params)?;
            write_densities(cfg, &s, &mut sink, "0000", &d)?;
            let mut cols = vec!["r".to_string(), "eta".to_string()];
            for node in ["k0", "mid", "k1"] {
                for w in ["W0", "W1", "W2", "W3"] {
                    cols.push(format!("{w}_{node}"));
                }
            }
            let names: Vec<&str> = cols.iter().map(String::as_str).collect();
            let mut t = Table::new(&names);
            let dk = s.grid.dk();
            for i in 0..s.grid.n() {
                let r = s.grid.r(i);
                let mut row = vec![r, spec.eta(r, t_case, &s.params)];
                for j in [j0, jm, j1] {
                    row.extend([
                        d.w0[[i, j]] * dk,
                        d.w1[[i, j]] * dk,
                        d.w2[[i, j]] * dk,
                        d.w3[[i, j]] * dk,
                    ]);
                }
                t.push(row);
            }
            sink.table("two_wave_peaks", &t)?;
            summary.snapshots = 1;
        }
    }
    summary.files = sink.files;
    Ok(summary)
}
