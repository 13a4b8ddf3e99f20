use std::collections::BTreeMap;
use std::path::Path;

use nlsb::coupled::gaussian_data;
use nlsb::harness::experiments::{cmd_linearized, cmd_reference, cmd_stability};
use nlsb::harness::tables::{read_fields, write_fields, Table, MEASURE_HEADER, NORMS_HEADER};
use nlsb::harness::validate::run_criterion;
use nlsb::harness::{ConfigBuilder, Perturbation, RunConfig, Suite, Validation, CRITERIA};
use nlsb::reference::closed_form_point;
use nlsb::{Grid1D, C64};
use proptest::prelude::*;

fn small(extra: &str) -> RunConfig {
    let text = format!("x_max = 8\nn_nodes = 401\ndt = 1e-3\nT = 0.2\noutput_every = 20\nfields_every = 100\n{extra}");
    ConfigBuilder::parse(&text).unwrap().build().unwrap()
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::array::uniform4(any::<f64>().prop_filter("finite", |v| v.is_finite())), 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["x", "re_u", "im_u", "v_tilde"]);
        for r in &rows {
            t.push(r.to_vec());
        }
        t.write(&path).unwrap();
        let back = Table::read(&path).unwrap();
        prop_assert_eq!(back.header, t.header);
        for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn fields_file_round_trip() {
    let grid = Grid1D::new(3.0, 31).unwrap();
    let u: Vec<C64> = grid.sample(|x| C64::new(x.sin(), 1.0 / 3.0 * x));
    let v = grid.sample(|x| (-x * x).exp() * 1e-300);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.csv");
    write_fields(&p, &grid, &u, &v).unwrap();
    let (x, u2, v2) = read_fields(&p).unwrap();
    assert_eq!(x, grid.coords());
    assert_eq!(u2, u);
    assert_eq!(v2, v);
    assert!(std::fs::read_to_string(&p).unwrap().starts_with("x,re_u,im_u,v_tilde\n"));
}

#[test]
fn identical_config_gives_identical_bytes() {
    for mode in ["decomposed", "regularized"] {
        let rc = small(&format!("v_mode = {mode}"));
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ra = cmd_linearized(&rc, a.path()).unwrap();
        let rb = cmd_linearized(&rc, b.path()).unwrap();
        assert_eq!(ra.render(), rb.render());
        let (da, db) = (dir_bytes(a.path()), dir_bytes(b.path()));
        assert!(da.contains_key("fields_t0.100000.csv") && da.contains_key("spiked_t0.200000.csv"));
        assert_eq!(da, db);
    }
}

#[test]
fn linearized_output_headers() {
    let rc = small("");
    let dir = tempfile::tempdir().unwrap();
    cmd_linearized(&rc, dir.path()).unwrap();
    let norms = Table::read(&dir.path().join("norms.csv")).unwrap();
    assert_eq!(norms.header, NORMS_HEADER);
    assert_eq!(norms.rows.len(), 11);
    let measure = Table::read(&dir.path().join("measure.csv")).unwrap();
    assert_eq!(measure.header, MEASURE_HEADER);
    // Strang splitting samples Ψ after each half step.
    assert_eq!(measure.rows.len(), 401);
    assert!(dir.path().join("norms.gp").is_file());
}

/// `∫_{-2t}^{2t} e^{-x²}` by composite Simpson with 4000 panels.
fn gaussian_mass(t: f64) -> f64 {
    let n = 4000;
    let (a, b) = (-2.0 * t, 2.0 * t);
    let h = (b - a) / n as f64;
    let s: f64 = (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * (-(a + i as f64 * h).powi(2)).exp()
        })
        .sum();
    s * h / 3.0
}

#[test]
fn psi_column_matches_quadrature_at_zero_coupling() {
    let rc = ConfigBuilder::parse("eps = 0\nfields_every = 4000").unwrap().build().unwrap();
    let dir = tempfile::tempdir().unwrap();
    cmd_linearized(&rc, dir.path()).unwrap();
    let m = Table::read(&dir.path().join("measure.csv")).unwrap();
    assert_eq!(m.rows.len(), 4001);
    let worst = m
        .rows
        .iter()
        .map(|r| (r[1] - gaussian_mass(r[0])).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst:e}");
}

#[test]
fn reference_at_zero_coupling_is_the_closed_form() {
    let rc = small("eps = 0");
    let dir = tempfile::tempdir().unwrap();
    cmd_reference(&rc, dir.path()).unwrap();
    let (x, u, _) = read_fields(&dir.path().join("reference.csv")).unwrap();
    for (xk, uk) in x.iter().zip(&u) {
        assert_eq!(uk.re, closed_form_point(&rc.sim.wave, *xk).0);
        assert_eq!(uk.im, 0.0);
    }
}

#[test]
fn file_perturbation_matches_gaussian() {
    let rc = small("");
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("pert.csv");
    let (g, gv) = gaussian_data(&rc.sim.grid, 1.0);
    write_fields(&p, &rc.sim.grid, &g, &gv).unwrap();
    let from_file = RunConfig {
        perturbation: Perturbation::File(p.clone()),
        ..rc.clone()
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ra = cmd_linearized(&rc, &a).unwrap();
    let rb = cmd_linearized(&from_file, &b).unwrap();
    assert_eq!(ra.norms, rb.norms);

    let mut sim = rc.sim.with_grid(Grid1D::new(8.0, 201).unwrap());
    sim.dt = 2e-3;
    let wrong = RunConfig { sim, ..from_file };
    let err = cmd_linearized(&wrong, &dir.path().join("c")).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
}

#[test]
fn stability_zero_perturbation_is_the_baseline() {
    // δ = 0 is always run; its D(t) is the scheme's self-error and is only reported.
    let rc = small("delta = 0.1");
    let dir = tempfile::tempdir().unwrap();
    let rep = cmd_stability(&rc, dir.path()).unwrap();
    let base = rep.get("baseline_d_final").unwrap();
    assert!(base.is_finite() && base >= 0.0);
    assert!(rep.get("sup_d_d0.1").unwrap().is_finite());
    assert!(rep.criteria.is_empty());
    for f in ["stability_d0.csv", "stability_d0.1.csv", "overlay_d0.1.gp", "sweep.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let sweep = RunConfig {
        sweep: vec![0.0, 0.1],
        ..rc
    };
    assert_eq!(cmd_stability(&sweep, dir.path()).unwrap_err().exit_code(), 2);
}

#[test]
fn default_parameters_are_accepted_and_echoed() {
    let text = "eps = 0.1\nb = -1.5\ndelta = 0.1\nx_max = 22\nT = 1\nA = 1\nC = 1";
    let rc = ConfigBuilder::parse(text).unwrap().build().unwrap();
    let echo = rc.echo();
    for line in ["eps = 0.1", "b = -1.5", "delta = 0.1", "x_max = 22", "t_final = 1", "a = 1", "c = 1"] {
        assert!(echo.lines().any(|l| l == line), "{line}");
    }
    assert_eq!(rc, RunConfig::default());
}

#[test]
fn criterion_list_is_complete() {
    assert_eq!(CRITERIA.len(), 10);
    let v = Validation {
        suite: Suite::Fast,
        out: None,
    };
    assert!(run_criterion(0, &v).is_err());
    assert!(run_criterion(11, &v).is_err());
    let r = run_criterion(1, &v).unwrap();
    assert_eq!((r.id, r.name), (1, CRITERIA[0]));
    assert!(r.line().starts_with("criterion  1 PASS"));
}
