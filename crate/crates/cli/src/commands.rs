use std::path::{Path, PathBuf};
use std::sync::Arc;

use flatwire::config::{load_design, parse_length, schema};
use flatwire::dcr::{dcr_closed, dcr_quadrature, LengthModel};
use flatwire::femq::{build_mesh, solve_frequencies, ResolutionPolicy};
use flatwire::mec::{build_network, build_network_with, terminal_impedance, zero_freq_inductance, NetworkOptions, QModel};
use flatwire::model::InductorDesign;
use flatwire::post::{current_density, frequency_response, loss_map};
use flatwire::ripple::{ac_loss_simplified, ac_loss_spectrum, ConverterPoint, ResistanceModel};
use flatwire::sweep::{run_sweep, SweepParameter, SweepSpec};
use num_complex::Complex64;

use crate::output::{fx, sci, CliError, CliResult, Run};
use crate::units::parse_si_list;
use crate::{Cli, Command, ConfigArg, MeshArgs};

const TAU: f64 = 2.0 * std::f64::consts::PI;

struct Loaded {
    path: PathBuf,
    text: String,
    design: InductorDesign,
}

fn config_path(cli: &Option<PathBuf>, arg: &ConfigArg) -> CliResult<PathBuf> {
    match (&arg.path, cli) {
        (Some(p), _) | (None, Some(p)) => Ok(p.clone()),
        (None, None) => Err(CliError::Input("no design config given (pass a path or --config)".into())),
    }
}

fn load(cli: &Option<PathBuf>, arg: &ConfigArg) -> CliResult<Loaded> {
    let path = config_path(cli, arg)?;
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let design = load_design(&text)?;
    Ok(Loaded { path, text, design })
}

fn policy(mesh: &MeshArgs, max_frequency: f64) -> ResolutionPolicy {
    ResolutionPolicy {
        max_frequency,
        cells_per_skin_depth: mesh.cells_per_skin_depth,
        refine: mesh.refine,
        padding: mesh.padding,
    }
}

fn record_mesh(run: &mut Run, mesh: &MeshArgs) {
    run.param("cells_per_skin_depth", mesh.cells_per_skin_depth);
    run.param("refine", mesh.refine);
    run.param("padding_m", mesh.padding.map_or("core diameter".to_string(), |p| p.to_string()));
}

fn check_frequencies(freqs: &[f64]) -> CliResult<()> {
    if freqs.is_empty() || freqs.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
        return Err(CliError::Input("frequencies must be finite and >= 0".into()));
    }
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn run(cli: Cli) -> CliResult<()> {
    let out = cli.out_dir.clone();
    match &cli.command {
        Command::Schema => {
            print!("{}", schema());
            Ok(())
        }
        Command::Dcr(arg) => dcr(&cli, arg, out),
        Command::Mec {
            config,
            freq,
            q_tau,
            q_table,
            gaps_only,
        } => mec(&cli, config, freq, *q_tau, q_table.as_deref(), *gaps_only, out),
        Command::Solve {
            config,
            freq,
            current,
            mesh,
            dump_fields,
        } => solve(&cli, config, freq, *current, mesh, *dump_fields, out),
        Command::Sweep {
            config,
            param,
            values,
            closure,
            freq,
            dc_current,
            ac_current,
            mesh,
        } => {
            let param = SweepParameter::from(*param);
            let mut spec = SweepSpec::new(param, parse_sweep_values(param, values)?);
            if let Some(c) = closure {
                spec.closure = (*c).into();
            }
            spec.frequency = *freq;
            spec.dc_current = *dc_current;
            spec.ac_current = *ac_current;
            let f_max = if param == SweepParameter::Frequency {
                spec.values.iter().cloned().fold(0.0, f64::max)
            } else {
                *freq
            };
            spec.policy = policy(mesh, f_max);
            sweep(&cli, config, spec, mesh, out)
        }
        Command::Ripple { .. } => ripple(&cli, out),
    }
}

fn dcr(cli: &Cli, arg: &ConfigArg, out: PathBuf) -> CliResult<()> {
    let l = load(&cli.config, arg)?;
    let mut run = Run::new(out, "dcr", cli.csv)?;
    run.set_config(&l.path, &l.text);
    let mut rows = Vec::new();
    for m in [LengthModel::Planar, LengthModel::Helical, LengthModel::Average] {
        let c = dcr_closed(&l.design.coil, m)?;
        let q = dcr_quadrature(&l.design.coil, m)?;
        rows.push(vec![m.name().to_string(), fx(c.resistance * 1e3, 6), fx(q.resistance * 1e3, 6), fx(c.coil_length, 6)]);
    }
    run.write_csv("dcr.csv", &["model", "closed_form_mohm", "quadrature_mohm", "coil_length_m"], &rows, true)?;
    if !run.csv_stdout() {
        println!("{:<10} {:>14} {:>14} {:>12}", "model", "closed [mΩ]", "quadrature [mΩ]", "length [m]");
        for r in &rows {
            println!("{:<10} {:>14} {:>14} {:>12}", r[0], &r[1][..r[1].len() - 3], &r[2][..r[2].len() - 3], r[3]);
        }
    }
    run.finish()
}

fn read_table(path: &Path, columns: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let bad = |m: String| CliError::Input(format!("{}: {m}", path.display()));
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| headers.iter().position(|h| h == *c).ok_or_else(|| bad(format!("missing column `{c}`"))))
        .collect::<CliResult<_>>()?;
    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = idx
            .iter()
            .map(|&i| rec.get(i).unwrap_or("").parse::<f64>().map_err(|_| bad(format!("row {}: column {} is not a number", n + 2, &headers[i]))))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn mec(
    cli: &Cli,
    arg: &ConfigArg,
    freq: &[f64],
    q_tau: Option<f64>,
    q_table: Option<&Path>,
    gaps_only: bool,
    out: PathBuf,
) -> CliResult<()> {
    check_frequencies(freq)?;
    let l = load(&cli.config, arg)?;
    let mut run = Run::new(out, "mec", cli.csv)?;
    run.set_config(&l.path, &l.text);
    run.param("frequencies_hz", join(freq));
    run.param("network", if gaps_only { "gaps-only" } else { "full" });
    let d = &l.design;
    let net = if gaps_only {
        build_network_with(d, NetworkOptions::gaps_only())
    } else {
        build_network(d)
    };
    let q = match (q_tau, q_table) {
        (Some(tau), _) => {
            run.param("q", format!("first-order tau={tau}"));
            QModel::FirstOrder { tau }
        }
        (None, Some(p)) => {
            run.param("q", format!("table {}", p.display()));
            let rows = read_table(p, &["frequency_hz", "q_re", "q_im"])?;
            let (f, v): (Vec<f64>, Vec<Complex64>) =
                rows.iter().filter(|r| r[0] > 0.0).map(|r| (r[0], Complex64::new(r[1], r[2]))).unzip();
            QModel::tabulated(f, v)?
        }
        (None, None) => QModel::Zero,
    };
    let omegas: Vec<f64> = freq.iter().map(|f| TAU * f).collect();
    let t = terminal_impedance(d.lead_resistance(), d.coil.turns, &net, &q, &omegas)?;

    let elems: Vec<Vec<String>> = net
        .elements
        .iter()
        .map(|e| {
            let r0 = e.value.eval(0.0).map(|v| v.re).unwrap_or(f64::NAN);
            vec![e.kind.name().to_string(), e.label.clone(), e.from.to_string(), e.to.to_string(), sci(r0)]
        })
        .collect();
    run.write_csv("mec_elements.csv", &["kind", "label", "from_node", "to_node", "reluctance_per_h"], &elems, false)?;

    let rows: Vec<Vec<String>> = freq
        .iter()
        .zip(&t.points)
        .map(|(f, p)| {
            vec![
                fx(*f, 3),
                sci(p.q.re),
                sci(p.q.im),
                sci(p.total_reluctance.re),
                sci(p.total_reluctance.im),
                sci(p.impedance.re),
                sci(p.impedance.im),
                fx(p.inductance.re * 1e6, 6),
                fx(p.inductance.im * 1e6, 6),
                fx(p.inductance.norm() * 1e6, 6),
            ]
        })
        .collect();
    run.write_csv(
        "mec.csv",
        &["frequency_hz", "q_re", "q_im", "reluctance_re_per_h", "reluctance_im_per_h", "z_re_ohm", "z_im_ohm", "l_re_uh", "l_im_uh", "l_abs_uh"],
        &rows,
        true,
    )?;
    if !run.csv_stdout() {
        let gaps = zero_freq_inductance(&build_network_with(d, NetworkOptions::gaps_only()), d.coil.turns)?;
        println!("L0 = {:.3} µH  (gaps only {:.3} µH)", t.zero_freq_inductance * 1e6, gaps * 1e6);
        println!("lead resistance = {:.4} mΩ", t.lead_resistance * 1e3);
        println!("{:>12} {:>12} {:>12} {:>12}", "f [Hz]", "|L| [µH]", "Re Z [Ω]", "Im Z [Ω]");
        for (f, p) in freq.iter().zip(&t.points) {
            println!("{:>12.1} {:>12.4} {:>12.5} {:>12.5}", f, p.inductance.norm() * 1e6, p.impedance.re, p.impedance.im);
        }
    }
    run.finish()
}

#[allow(clippy::too_many_arguments)]
fn solve(cli: &Cli, arg: &ConfigArg, freq: &[f64], current: f64, mesh: &MeshArgs, dump: bool, out: PathBuf) -> CliResult<()> {
    check_frequencies(freq)?;
    if !(current > 0.0) {
        return Err(CliError::Input("--current must be > 0".into()));
    }
    let l = load(&cli.config, arg)?;
    let mut run = Run::new(out, "solve", cli.csv)?;
    run.set_config(&l.path, &l.text);
    run.param("frequencies_hz", join(freq));
    run.param("current_peak_a", current);
    record_mesh(&mut run, mesh);
    let f_max = freq.iter().cloned().fold(0.0, f64::max);
    let pol = policy(mesh, f_max);
    let fr = frequency_response(&l.design, freq, current, &pol)?;

    let rows: Vec<Vec<String>> = fr
        .points
        .iter()
        .map(|p| {
            vec![
                fx(p.frequency, 3),
                fx(p.resistance * 1e3, 6),
                fx(p.inductance.re * 1e6, 6),
                fx(p.inductance.im * 1e6, 6),
                fx(p.inductance.norm() * 1e6, 6),
                sci(p.q.re),
                sci(p.q.im),
                sci(p.loss_total),
                sci(p.loss_dc_part),
                sci(p.loss_eddy),
                sci(p.loss_near_gap),
                sci(p.loss_remainder),
            ]
        })
        .collect();
    run.write_csv(
        "response.csv",
        &[
            "frequency_hz",
            "rac_mohm",
            "l_re_uh",
            "l_im_uh",
            "l_abs_uh",
            "q_re",
            "q_im",
            "loss_total_w",
            "loss_dc_part_w",
            "loss_eddy_w",
            "loss_near_gap_w",
            "loss_remainder_w",
        ],
        &rows,
        true,
    )?;

    let turn_header: Vec<String> = std::iter::once("turn".to_string())
        .chain(fr.points.iter().map(|p| format!("loss_w_at_{}hz", p.frequency)))
        .collect();
    let turns = l.design.coil.turns as usize;
    let turn_rows: Vec<Vec<String>> = (0..turns)
        .map(|k| std::iter::once(k.to_string()).chain(fr.points.iter().map(|p| sci(p.loss_per_turn[k]))).collect())
        .collect();
    let th: Vec<&str> = turn_header.iter().map(String::as_str).collect();
    run.write_csv("turn_losses.csv", &th, &turn_rows, false)?;

    if dump {
        let grid = Arc::new(build_mesh(&l.design, &pol)?);
        let sols = solve_frequencies(grid.clone(), freq, Complex64::new(current, 0.0))?;
        for (f, s) in freq.iter().zip(&sols) {
            let cd = current_density(s);
            let lm = loss_map(s);
            let nr1 = grid.nr() - 1;
            let rows: Vec<Vec<String>> = cd
                .cells
                .iter()
                .zip(&lm.cells)
                .map(|(c, p)| {
                    let (i, j) = (c.cell % nr1, c.cell / nr1);
                    let rm = 0.5 * (grid.r[i] + grid.r[i + 1]);
                    let zm = 0.5 * (grid.z[j] + grid.z[j + 1]);
                    vec![
                        fx(rm * 1e3, 6),
                        fx(zm * 1e3, 6),
                        c.turn.map_or(String::new(), |t| t.to_string()),
                        sci(c.total.re * 1e-6),
                        sci(c.total.im * 1e-6),
                        sci(c.eddy.re * 1e-6),
                        sci(c.eddy.im * 1e-6),
                        sci(p.density),
                        u8::from(p.near_gap).to_string(),
                    ]
                })
                .collect();
            run.write_csv(
                &format!("fields_{f}hz.csv"),
                &["r_mm", "z_mm", "turn", "j_total_re_a_per_mm2", "j_total_im_a_per_mm2", "j_eddy_re_a_per_mm2", "j_eddy_im_a_per_mm2", "loss_density_w_per_m3", "near_gap"],
                &rows,
                false,
            )?;
        }
    }

    if !run.csv_stdout() {
        println!("grid nodes = {}", fr.grid_nodes);
        println!("DC resistance (mesh) = {:.4} mΩ, L0 = {:.3} µH", fr.dc_resistance * 1e3, fr.l0 * 1e6);
        println!("{:>12} {:>12} {:>12} {:>12} {:>12}", "f [Hz]", "Rac [mΩ]", "|L| [µH]", "loss [W]", "eddy [W]");
        for p in &fr.points {
            println!(
                "{:>12.1} {:>12.3} {:>12.3} {:>12.5} {:>12.5}",
                p.frequency,
                p.resistance * 1e3,
                p.inductance.norm() * 1e6,
                p.loss_total,
                p.loss_eddy
            );
        }
    }
    run.finish()
}

fn parse_sweep_values(param: SweepParameter, s: &str) -> CliResult<Vec<f64>> {
    if param == SweepParameter::Frequency {
        return parse_si_list(s).map_err(CliError::Input);
    }
    s.split(',')
        .map(|v| match param {
            SweepParameter::LeftClearance | SweepParameter::RightClearance | SweepParameter::Thickness | SweepParameter::Spacing => {
                parse_length(v)
            }
            _ => v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a gap count")),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Input)
}

fn sweep(cli: &Cli, arg: &ConfigArg, spec: SweepSpec, mesh: &MeshArgs, out: PathBuf) -> CliResult<()> {
    let l = load(&cli.config, arg)?;
    let mut run = Run::new(out, "sweep", cli.csv)?;
    run.set_config(&l.path, &l.text);
    run.param("parameter", spec.parameter.column());
    run.param("values", join(&spec.values));
    run.param("closure", format!("{:?}", spec.closure));
    run.param("frequency_hz", spec.frequency);
    run.param("dc_current_a", spec.dc_current);
    run.param("ac_current_peak_a", spec.ac_current);
    record_mesh(&mut run, mesh);
    let outcomes = run_sweep(&l.design, &spec)?;
    let scale = spec.parameter.display_scale();
    let mut rows = Vec::new();
    let mut failed = 0;
    for (v, o) in spec.values.iter().zip(&outcomes) {
        let mut row = vec![fx(v * scale, 6)];
        match o {
            Ok(r) => row.extend([
                fx(r.frequency, 3),
                "ok".into(),
                fx(r.dc_resistance * 1e3, 6),
                fx(r.ac_resistance * 1e3, 6),
                sci(r.dc_loss),
                sci(r.ac_loss),
                sci(r.eddy_loss),
                fx(r.l0 * 1e6, 6),
                fx(r.inductance_abs * 1e6, 6),
                String::new(),
            ]),
            Err(e) => {
                failed += 1;
                row.extend([String::new(), "failed".into()]);
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.push(e.clone());
            }
        }
        rows.push(row);
    }
    run.write_csv(
        "sweep.csv",
        &[
            spec.parameter.column(),
            "frequency_hz",
            "status",
            "dcr_mohm",
            "rac_mohm",
            "dc_loss_w",
            "ac_loss_w",
            "eddy_loss_w",
            "l0_uh",
            "l_abs_uh",
            "error",
        ],
        &rows,
        true,
    )?;
    if !run.csv_stdout() {
        println!(
            "{:>14} {:>10} {:>10} {:>10} {:>10} {:>10}",
            spec.parameter.column(),
            "DCR[mΩ]",
            "Rac[mΩ]",
            "Pdc[W]",
            "Pac[W]",
            "|L|[µH]"
        );
        for (v, o) in spec.values.iter().zip(&outcomes) {
            match o {
                Ok(r) => println!(
                    "{:>14.4} {:>10.4} {:>10.2} {:>10.4} {:>10.4} {:>10.3}",
                    v * scale,
                    r.dc_resistance * 1e3,
                    r.ac_resistance * 1e3,
                    r.dc_loss,
                    r.ac_loss,
                    r.inductance_abs * 1e6
                ),
                Err(e) => println!("{:>14.4} failed: {e}", v * scale),
            }
        }
    }
    if failed > 0 {
        eprintln!("warning: {failed} of {} sweep points failed", spec.values.len());
    }
    run.finish()
}

fn interpolate(table: &[(f64, f64)], x: f64, what: &str) -> CliResult<f64> {
    ResistanceModel::Tabulated(table.to_vec())
        .eval(x, x)
        .map_err(|_| CliError::Input(format!("{what} table does not cover {x} Hz")))
}

fn ripple(cli: &Cli, out: PathBuf) -> CliResult<()> {
    let Command::Ripple {
        config,
        vo,
        fs,
        inductance,
        rac,
        from,
        h_max,
        cp,
        dc_current,
    } = &cli.command
    else {
        unreachable!("dispatched on the ripple command");
    };
    let mut run = Run::new(out, "ripple", cli.csv)?;
    let table = match from {
        Some(p) => {
            let rows = read_table(p, &["frequency_hz", "rac_mohm", "l_abs_uh"])?;
            let mut rows: Vec<_> = rows.into_iter().filter(|r| r[0] > 0.0).collect();
            rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
            run.param("response_table", p.display());
            Some(rows)
        }
        None => None,
    };
    let l = match (inductance, &table) {
        (Some(l), _) => *l,
        (None, Some(t)) => {
            let pairs: Vec<(f64, f64)> = t.iter().map(|r| (r[0], r[2] * 1e-6)).collect();
            interpolate(&pairs, *fs, "inductance")?
        }
        (None, None) => return Err(CliError::Input("give --inductance or --from <response.csv>".into())),
    };
    let model = match (rac, &table) {
        (Some(r), _) => ResistanceModel::SqrtFrequency { at_switching: *r },
        (None, Some(t)) => ResistanceModel::Tabulated(t.iter().map(|r| (r[0], r[1] * 1e-3)).collect()),
        (None, None) => return Err(CliError::Input("give --rac or --from <response.csv>".into())),
    };
    let mut point = ConverterPoint::new(*vo, *fs, l);
    point.parasitic_capacitance = *cp;
    run.param("output_voltage_v", vo);
    run.param("switching_frequency_hz", fs);
    run.param("inductance_h", l);
    run.param("h_max", h_max);
    if let Some(r) = rac {
        run.param("rac_at_fs_ohm", r);
    }
    if let Some(c) = cp {
        run.param("parasitic_capacitance_f", c);
    }
    let spectrum = ac_loss_spectrum(&point, &model, *h_max)?;
    let rows: Vec<Vec<String>> = spectrum
        .lines
        .iter()
        .map(|s| {
            vec![
                s.harmonic.order.to_string(),
                fx(s.frequency, 3),
                sci(s.harmonic.amplitude),
                fx(s.resistance * 1e3, 6),
                sci(s.loss),
                u8::from(s.harmonic.beyond_resonance).to_string(),
            ]
        })
        .collect();
    run.write_csv(
        "spectrum.csv",
        &["harmonic", "frequency_hz", "amplitude_peak_a", "resistance_mohm", "loss_w", "beyond_resonance"],
        &rows,
        true,
    )?;

    let dc_loss = match dc_current {
        Some(i) => {
            let c = config.path.clone().or(cli.config.clone()).ok_or_else(|| {
                CliError::Input("the DC loss line needs the design config for its DC resistance".into())
            })?;
            let text = std::fs::read_to_string(&c).map_err(|e| CliError::io(&c, e))?;
            let d = load_design(&text)?;
            run.set_config(&c, &text);
            run.param("dc_current_a", i);
            Some(i * i * flatwire::dcr::dcr_planar(&d.coil)?.resistance)
        }
        None => None,
    };

    if !run.csv_stdout() {
        println!("ripple I_pp = {:.4} A", point.ripple_pp());
        if let Some(fr) = point.resonant_frequency() {
            println!("first resonance f_r = {:.4} MHz", fr * 1e-6);
        }
        println!("AC conduction loss (odd harmonics ≤ {h_max}) = {:.5} W", spectrum.total);
        if let Some(r) = rac {
            let s = ac_loss_simplified(&point, *r)?;
            println!("√f-rule closed form through h = 25       = {:.5} W", s.from_ripple);
        }
        if let Some(p) = dc_loss {
            println!("DC loss = {p:.5} W");
        }
        let flagged = spectrum.lines.iter().filter(|l| l.harmonic.beyond_resonance).count();
        if flagged > 0 {
            println!("warning: {flagged} harmonic(s) at or above the first resonance; the model is not accurate there");
        }
    }
    run.finish()
}
