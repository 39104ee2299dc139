//! Convergence studies on graded meshes of the unit disk.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::time::Instant;

use fracfem_core::mesh::PointLocator;
use fracfem_core::oracle::cone_obstacle;
use fracfem_core::{
    assemble_load, assemble_stiffness, build_graded_mesh, discrete_contact_set, energy_error,
    interpolate, mesh_stats, solve_linear, solve_obstacle, Cholesky, Domain, ExplicitSolution,
    Grading, MeshStats, ObstacleProblem, SolveReport, StarIndex, TriangleMesh,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::io::{self, Row};
use crate::{CoreError, HarnessError};

/// Least squares line through `(log x, log y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals in log space.
    pub residual: f64,
}

pub fn fit_rate(x: &[f64], y: &[f64]) -> Result<Fit, HarnessError> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(HarnessError::Fit(format!(
            "need at least 3 points, got {}",
            x.len().min(y.len())
        )));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(HarnessError::Fit("data must be positive".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if !(sxx > 1e-24 * (1.0 + mx * mx) * n) {
        return Err(HarnessError::Fit("degenerate abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(Fit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    /// Sorted by decreasing `h`.
    pub rows: Vec<Row>,
}

impl ConvergenceTable {
    pub fn fit_vs_ndof(&self) -> Result<Fit, HarnessError> {
        let x: Vec<f64> = self.rows.iter().map(|r| r.ndof as f64).collect();
        fit_rate(&x, &self.errors())
    }

    pub fn fit_vs_h(&self) -> Result<Fit, HarnessError> {
        let x: Vec<f64> = self.rows.iter().map(|r| r.h).collect();
        fit_rate(&x, &self.errors())
    }

    fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.energy_error).collect()
    }
}

/// Per level diagnostics that do not go into the CSV.
#[derive(Clone, Debug)]
pub struct LevelInfo {
    pub h: f64,
    pub stats: MeshStats,
    /// Area of the triangles whose vertices are all in contact.
    pub contact_area: f64,
    pub contact_dofs: usize,
    /// `max (χ − u)₊`.
    pub primal_infeasibility: f64,
    /// `max (−λ)₊`.
    pub dual_infeasibility: f64,
    pub comp_residual: f64,
    pub kkt_residual: f64,
    pub pivoting: bool,
}

fn infeasibility(r: &SolveReport, chi: &[f64]) -> (f64, f64) {
    let p =
        r.u.values
            .iter()
            .zip(chi)
            .map(|(u, c)| c - u)
            .fold(0.0, f64::max);
    let d = r.lambda.iter().map(|l| -l).fold(0.0, f64::max).abs();
    (p, d)
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub table: ConvergenceTable,
    /// For the explicit obstacle experiment: the unconstrained problem with
    /// forcing `f̃` on the same matrices.
    pub linear: Option<ConvergenceTable>,
    /// Every computed level, including the surrogate level of the
    /// qualitative experiment.
    pub levels: Vec<LevelInfo>,
}

fn at<E: Into<CoreError>>(s: f64, h: f64) -> impl FnOnce(E) -> HarnessError {
    move |e| HarnessError::Level {
        s,
        h,
        source: e.into(),
    }
}

struct Discrete {
    mesh: TriangleMesh,
    star: StarIndex,
    factor: Cholesky,
}

fn discretize(cfg: &ExperimentConfig, level: usize, h: f64) -> Result<Discrete, HarnessError> {
    let s = cfg.s;
    let grading = Grading::new(h, cfg.mu).map_err(at(s, h))?;
    let mesh = build_graded_mesh(&Domain::unit_disk(), grading).map_err(at(s, h))?;
    let star = StarIndex::new(&mesh);
    let sys = assemble_stiffness(&mesh, &star, s, &cfg.rules).map_err(at(s, h))?;
    if cfg.dump_stiffness {
        let mut w = BufWriter::new(File::create(
            cfg.out.join(format!("stiffness_{level}.bin")),
        )?);
        io::write_stiffness(&mut w, &sys.matrix)?;
        w.flush()?;
    }
    let factor = sys.matrix.cholesky().map_err(at(s, h))?;
    Ok(Discrete { mesh, star, factor })
}

fn level_metadata(
    cfg: &ExperimentConfig,
    level: usize,
    stats: &MeshStats,
) -> Vec<(String, String)> {
    let mut m = vec![("fracfem".to_string(), env!("CARGO_PKG_VERSION").to_string())];
    m.extend(cfg.echo());
    m.push(("level".into(), level.to_string()));
    m.extend(stats_pairs(&format!("level{level}."), stats));
    m
}

fn stats_pairs(prefix: &str, st: &MeshStats) -> Vec<(String, String)> {
    let (c1, c2) = st.grading_constants.unwrap_or((f64::NAN, f64::NAN));
    vec![
        (format!("{prefix}ndof"), st.ndof.to_string()),
        (format!("{prefix}triangles"), st.ntriangles.to_string()),
        (
            format!("{prefix}boundary_segments"),
            st.boundary_segments.to_string(),
        ),
        (format!("{prefix}sigma"), io::fmt_f64(st.sigma)),
        (format!("{prefix}c1"), io::fmt_f64(c1)),
        (format!("{prefix}c2"), io::fmt_f64(c2)),
        (format!("{prefix}h_min"), io::fmt_f64(st.h_min)),
        (format!("{prefix}h_max"), io::fmt_f64(st.h_max)),
    ]
}

fn dump_field(
    cfg: &ExperimentConfig,
    level: usize,
    d: &Discrete,
    u: &[f64],
    contact: &[bool],
) -> Result<(), HarnessError> {
    if !cfg.dump_fields {
        return Ok(());
    }
    let stats = mesh_stats(&d.mesh);
    let mut w = BufWriter::new(File::create(cfg.out.join(format!("solution_{level}.txt")))?);
    io::write_metadata(&mut w, &level_metadata(cfg, level, &stats))?;
    io::write_field(&mut w, &d.mesh, &d.mesh.vertex_values(u), contact)?;
    w.flush()?;
    Ok(())
}

fn write_table(
    cfg: &ExperimentConfig,
    name: &str,
    table: &ConvergenceTable,
    levels: &[LevelInfo],
) -> Result<(), HarnessError> {
    let mut meta = vec![("fracfem".to_string(), env!("CARGO_PKG_VERSION").to_string())];
    meta.extend(cfg.echo());
    for (k, l) in levels.iter().enumerate() {
        meta.extend(stats_pairs(&format!("level{k}."), &l.stats));
    }
    for (label, fit) in [("ndof", table.fit_vs_ndof()), ("h", table.fit_vs_h())] {
        if let Ok(f) = fit {
            meta.push((format!("slope_vs_{label}"), io::fmt_f64(f.slope)));
            meta.push((format!("fit_residual_vs_{label}"), io::fmt_f64(f.residual)));
        }
    }
    let mut w = BufWriter::new(File::create(cfg.out.join(name))?);
    io::write_metadata(&mut w, &meta)?;
    io::write_csv(&mut w, &table.rows)?;
    w.flush()?;
    Ok(())
}

/// Runs every level of `cfg`, writing `convergence.csv` and the dumps into
/// `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let out = match cfg.experiment {
        Experiment::Linear | Experiment::ExplicitObstacle => run_explicit(cfg)?,
        Experiment::Qualitative => run_qualitative(cfg)?,
    };
    write_table(cfg, "convergence.csv", &out.table, &out.levels)?;
    if let Some(lin) = &out.linear {
        write_table(cfg, "convergence_linear.csv", lin, &out.levels)?;
    }
    Ok(out)
}

fn run_explicit(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let s = cfg.s;
    let obstacle = cfg.experiment == Experiment::ExplicitObstacle;
    let sol = ExplicitSolution::new(s, cfg.r_c).map_err(at(s, cfg.h_values[0]))?;
    let mut table = ConvergenceTable::default();
    let mut linear = ConvergenceTable::default();
    let mut levels = Vec::new();
    for (level, &h) in cfg.h_values.iter().enumerate() {
        let start = Instant::now();
        let d = discretize(cfg, level, h)?;
        let f_tilde =
            assemble_load(&d.mesh, |x| sol.f_tilde(x), cfg.rules.q_load).map_err(at(s, h))?;
        let lin = solve_linear(&d.factor, &f_tilde).map_err(at(s, h))?;
        let lin_err = energy_error(&lin.values, &d.factor, &f_tilde, sol.e0).map_err(at(s, h))?;
        let stats = mesh_stats(&d.mesh);
        let ndof = d.mesh.ndof();
        let mut info = LevelInfo {
            h,
            stats,
            contact_area: 0.0,
            contact_dofs: 0,
            primal_infeasibility: 0.0,
            dual_infeasibility: 0.0,
            comp_residual: 0.0,
            kkt_residual: 0.0,
            pivoting: false,
        };
        if obstacle {
            let f = assemble_load(&d.mesh, |x| sol.f(x), cfg.rules.q_load).map_err(at(s, h))?;
            let chi =
                interpolate(&d.mesh, &d.star, |x| sol.chi(x), cfg.q_ball).map_err(at(s, h))?;
            let Discrete { mesh, star, factor } = d;
            let p = ObstacleProblem::from_factor(factor, f, chi.values).map_err(at(s, h))?;
            let r = solve_obstacle(&p, cfg.tol, cfg.max_iter).map_err(at(s, h))?;
            let err = energy_error(&r.u.values, &p.factor, &f_tilde, sol.e0).map_err(at(s, h))?;
            let contact = discrete_contact_set(&mesh, &r.u.values, &p.chi, cfg.contact_tol);
            info.contact_area = contact.area(&mesh);
            info.contact_dofs = contact.dofs.len();
            (info.primal_infeasibility, info.dual_infeasibility) = infeasibility(&r, &p.chi);
            info.comp_residual = r.comp_residual;
            info.kkt_residual = r.kkt_residual;
            info.pivoting = r.pivoting;
            let d = Discrete {
                mesh,
                star,
                factor: p.factor,
            };
            dump_field(cfg, level, &d, &r.u.values, &contact.vertex_flags)?;
            let wall = start.elapsed().as_secs_f64();
            table.rows.push(Row {
                h,
                ndof,
                energy_error: err,
                iters: r.iterations,
                wall_seconds: wall,
            });
            linear.rows.push(Row {
                h,
                ndof,
                energy_error: lin_err,
                iters: 1,
                wall_seconds: wall,
            });
        } else {
            let flags = vec![false; d.mesh.num_vertices()];
            dump_field(cfg, level, &d, &lin.values, &flags)?;
            let wall = start.elapsed().as_secs_f64();
            table.rows.push(Row {
                h,
                ndof,
                energy_error: lin_err,
                iters: 1,
                wall_seconds: wall,
            });
        }
        levels.push(info);
    }
    Ok(ExperimentOutput {
        table,
        linear: obstacle.then_some(linear),
        levels,
    })
}

struct Solved {
    d: Discrete,
    u: Vec<f64>,
    info: LevelInfo,
    iters: usize,
}

fn solve_cone(cfg: &ExperimentConfig, level: usize, h: f64) -> Result<Solved, HarnessError> {
    let s = cfg.s;
    let d = discretize(cfg, level, h)?;
    let chi = interpolate(&d.mesh, &d.star, |x| cone_obstacle(x, cfg.r_c), cfg.q_ball)
        .map_err(at(s, h))?;
    let Discrete { mesh, star, factor } = d;
    let n = mesh.ndof();
    let p = ObstacleProblem::from_factor(factor, vec![0.0; n], chi.values).map_err(at(s, h))?;
    let r = solve_obstacle(&p, cfg.tol, cfg.max_iter).map_err(at(s, h))?;
    let contact = discrete_contact_set(&mesh, &r.u.values, &p.chi, cfg.contact_tol);
    let (primal_infeasibility, dual_infeasibility) = infeasibility(&r, &p.chi);
    let info = LevelInfo {
        h,
        stats: mesh_stats(&mesh),
        contact_area: contact.area(&mesh),
        contact_dofs: contact.dofs.len(),
        primal_infeasibility,
        dual_infeasibility,
        comp_residual: r.comp_residual,
        kkt_residual: r.kkt_residual,
        pivoting: r.pivoting,
    };
    let d = Discrete {
        mesh,
        star,
        factor: p.factor,
    };
    dump_field(cfg, level, &d, &r.u.values, &contact.vertex_flags)?;
    Ok(Solved {
        d,
        u: r.u.values,
        info,
        iters: r.iterations,
    })
}

/// Errors of the coarse levels in the energy norm of the finest level, with
/// the coarse solutions evaluated at the fine vertices.
fn run_qualitative(cfg: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    let last = cfg.h_values.len() - 1;
    let fine = solve_cone(cfg, last, cfg.h_values[last])?;
    let mut table = ConvergenceTable::default();
    let mut levels = Vec::new();
    for (level, &h) in cfg.h_values[..last].iter().enumerate() {
        let start = Instant::now();
        let c = solve_cone(cfg, level, h)?;
        let u_c = fracfem_core::NodalField { values: c.u };
        let loc = PointLocator::new(&c.d.mesh);
        let e: Vec<f64> = fine
            .d
            .mesh
            .dof_vertices()
            .iter()
            .zip(&fine.u)
            .map(|(&v, uf)| uf - u_c.eval(&c.d.mesh, &loc, fine.d.mesh.vertices()[v]))
            .collect();
        let err = fine.d.factor.energy(&e).max(0.0).sqrt();
        table.rows.push(Row {
            h,
            ndof: c.d.mesh.ndof(),
            energy_error: err,
            iters: c.iters,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
        levels.push(c.info);
    }
    levels.push(fine.info);
    Ok(ExperimentOutput {
        table,
        linear: None,
        levels,
    })
}
