//! Magnetic equivalent circuit of the gapped core.
//!
//! The network is a ladder: centre-leg core pieces in series with the gaps,
//! every gap shunted by its fringing permeance, the window-leakage annulus in
//! parallel with the whole centre-leg stack, and the yoke/outer-leg pieces
//! closing the loop. The coil MMF `N i` drives a source branch that also
//! carries the eddy-current reluctance `R_0 Q(jω)`, so the source sees
//! `R_t(jω) = R_0 (1 + Q(jω))`.

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{FringingKind, InductorDesign};
use crate::MU0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Gap,
    Core,
    Fringing,
    WindowLeakage,
    /// Frequency-dependent eddy reluctance; carries the coil MMF.
    Eddy,
}

impl ElementKind {
    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Gap => "gap",
            ElementKind::Core => "core",
            ElementKind::Fringing => "fringing",
            ElementKind::WindowLeakage => "window-leakage",
            ElementKind::Eddy => "eddy",
        }
    }
}

/// Eddy-current reaction expressed as `Q(jω)`.
#[derive(Debug, Clone, PartialEq)]
pub enum QModel {
    /// No eddy reaction.
    Zero,
    /// `Q(jω) = jωτ`.
    FirstOrder { tau: f64 },
    /// Piecewise-linear (in frequency) interpolation of complex samples.
    /// The point `(0 Hz, 0)` is always implied; evaluation above the last
    /// frequency is an error.
    Tabulated { freqs: Vec<f64>, values: Vec<Complex64> },
}

impl QModel {
    pub fn tabulated(freqs: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != values.len() || freqs.is_empty() {
            return Err(Error::InvalidArgument("Q table needs equal, non-empty frequency and value lists".into()));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) || !(freqs[0] >= 0.0) {
            return Err(Error::InvalidArgument("Q table frequencies must be >= 0 and strictly increasing".into()));
        }
        if freqs[0] == 0.0 && values[0].norm() > 1e-12 {
            return Err(Error::InvalidArgument("Q(0) must be 0".into()));
        }
        Ok(QModel::Tabulated { freqs, values })
    }

    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        match self {
            QModel::Zero => Ok(Complex64::new(0.0, 0.0)),
            QModel::FirstOrder { tau } => Ok(Complex64::new(0.0, omega * tau)),
            QModel::Tabulated { freqs, values } => {
                let f = omega / (2.0 * PI);
                if f == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let fmax = *freqs.last().expect("non-empty");
                if !(f >= 0.0) || f > fmax * (1.0 + 1e-12) {
                    return Err(Error::OutOfRange {
                        quantity: "Q(jω) frequency",
                        at: f,
                        min: 0.0,
                        max: fmax,
                    });
                }
                let (mut f0, mut q0) = (0.0, Complex64::new(0.0, 0.0));
                for (&f1, &q1) in freqs.iter().zip(values) {
                    if f <= f1 {
                        if f1 == f0 {
                            return Ok(q1);
                        }
                        let t = (f - f0) / (f1 - f0);
                        return Ok(q0 + (q1 - q0) * t);
                    }
                    f0 = f1;
                    q0 = q1;
                }
                Ok(q0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReluctanceValue {
    Fixed(f64),
    /// `base · Q(jω)`, zero at DC.
    Eddy { base: f64, q: QModel },
}

impl ReluctanceValue {
    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        match self {
            ReluctanceValue::Fixed(r) => Ok(Complex64::new(*r, 0.0)),
            ReluctanceValue::Eddy { base, q } => Ok(q.eval(omega)? * *base),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub kind: ElementKind,
    pub label: String,
    pub value: ReluctanceValue,
    /// Positive flux runs `from → to` through the element.
    pub from: usize,
    pub to: usize,
    /// MMF per ampere of terminal current [turns], in the `from → to` sense.
    pub mmf_per_amp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReluctanceNetwork {
    pub node_count: usize,
    pub elements: Vec<Element>,
    pub turns: u32,
    source: usize,
}

/// Which parasitic paths to include when building the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkOptions {
    pub fringing: bool,
    pub leakage: bool,
    /// `false` treats the ferrite as infinitely permeable.
    pub core: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            fringing: true,
            leakage: true,
            core: true,
        }
    }
}

impl NetworkOptions {
    pub fn gaps_only() -> Self {
        Self {
            fringing: false,
            leakage: false,
            core: false,
        }
    }
}

pub fn gap_reluctance(length: f64, area: f64) -> f64 {
    length / (MU0 * area)
}

/// Fringing permeance of one gap: arc paths of length `g + πx` for
/// `0 ≤ x ≤ k g` along the gap perimeter.
/// With `r_f = k g` the result does not depend on `g`.
pub fn fringing_permeance(design: &InductorDesign) -> f64 {
    let sides = match design.fringing.kind {
        FringingKind::Arc => 1.0,
        FringingKind::ArcTwoSided => 2.0,
        FringingKind::None => return 0.0,
    };
    let per_perimeter = sides * MU0 / PI * (PI * design.fringing.radius_factor).ln_1p();
    per_perimeter * 2.0 * PI * design.core.center_leg_radius
}

/// Reluctance of the annulus between centre leg and coil inner radius.
pub fn window_leakage_reluctance(design: &InductorDesign) -> Option<f64> {
    let rw = design.coil.inner_radius;
    let rc = design.core.center_leg_radius;
    let area = PI * (rw * rw - rc * rc);
    (area > 0.0).then(|| design.coil.height() / (MU0 * area))
}

struct Builder {
    nodes: usize,
    elements: Vec<Element>,
}

impl Builder {
    fn node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    fn push(&mut self, kind: ElementKind, label: String, r: f64, from: usize, to: usize) {
        self.elements.push(Element {
            kind,
            label,
            value: ReluctanceValue::Fixed(r),
            from,
            to,
            mmf_per_amp: 0.0,
        });
    }
}

pub fn build_network(design: &InductorDesign) -> ReluctanceNetwork {
    build_network_with(design, NetworkOptions::default())
}

pub fn build_network_with(design: &InductorDesign, opts: NetworkOptions) -> ReluctanceNetwork {
    let core = &design.core;
    let ae = core.effective_area;
    let mu_core = MU0 * core.relative_permeability;
    let mut b = Builder { nodes: 1, elements: Vec::new() };
    let bottom = 0;

    // centre leg, bottom to top
    let mut at = bottom;
    let segments = core.center_leg_segments();
    let gaps = core.sorted_gaps();
    for (i, seg) in segments.iter().enumerate() {
        if opts.core && *seg > 0.0 {
            let next = b.node();
            b.push(ElementKind::Core, format!("centre-leg[{i}]"), seg / (mu_core * ae), at, next);
            at = next;
        }
        if let Some(g) = gaps.get(i) {
            let next = b.node();
            b.push(ElementKind::Gap, format!("gap[{i}]"), gap_reluctance(g.length, ae), at, next);
            let pf = fringing_permeance(design);
            if opts.fringing && pf > 0.0 {
                b.push(ElementKind::Fringing, format!("fringing[{i}]"), 1.0 / pf, at, next);
            }
            at = next;
        }
    }
    let mut top = at;
    if top == bottom {
        // ungapped leg with an ideal core: give the stack its own node
        top = b.node();
        b.push(ElementKind::Core, "centre-leg".into(), 0.0, bottom, top);
    }
    if opts.leakage {
        if let Some(r) = window_leakage_reluctance(design) {
            b.push(ElementKind::WindowLeakage, "window-leakage".into(), r, bottom, top);
        }
    }

    // return path top → bottom, ending in the source branch
    let mut at = top;
    if opts.core {
        for (i, l) in core.return_path_lengths.iter().enumerate() {
            let next = b.node();
            b.push(ElementKind::Core, format!("return[{i}]"), l / (mu_core * ae), at, next);
            at = next;
        }
    }
    let source = b.elements.len();
    b.elements.push(Element {
        kind: ElementKind::Eddy,
        label: "coil-eddy".into(),
        value: ReluctanceValue::Eddy {
            base: 0.0,
            q: QModel::Zero,
        },
        from: at,
        to: bottom,
        mmf_per_amp: f64::from(design.coil.turns),
    });
    ReluctanceNetwork {
        node_count: b.nodes,
        elements: b.elements,
        turns: design.coil.turns,
        source,
    }
}

/// Branch fluxes and node potentials of a solved network.
#[derive(Debug, Clone)]
pub struct FluxSolution {
    pub omega: f64,
    pub current: Complex64,
    /// Magnetic scalar potential per node [A·turn], node 0 grounded.
    pub potentials: Vec<Complex64>,
    /// Flux per element [Wb], in the element's `from → to` sense.
    pub flux: Vec<Complex64>,
    /// Flux through the source branch.
    pub source_flux: Complex64,
    /// MMF over source flux: the total reluctance the coil sees.
    pub total_reluctance: Complex64,
}

impl FluxSolution {
    /// Largest net flux leaving any node, relative to the source flux.
    pub fn conservation_residual(&self, network: &ReluctanceNetwork) -> f64 {
        let mut net = vec![Complex64::new(0.0, 0.0); network.node_count];
        for (e, phi) in network.elements.iter().zip(&self.flux) {
            net[e.from] += phi;
            net[e.to] -= phi;
        }
        let scale = self.source_flux.norm().max(f64::MIN_POSITIVE);
        net.iter().map(|v| v.norm() / scale).fold(0.0, f64::max)
    }
}

impl ReluctanceNetwork {
    pub fn source_index(&self) -> usize {
        self.source
    }

    /// Replace the eddy reluctance of the source branch by `R_0 Q(jω)`.
    pub fn with_q(mut self, q: QModel) -> Result<Self> {
        let r0 = self.zero_freq_reluctance()?;
        self.elements[self.source].value = ReluctanceValue::Eddy { base: r0, q };
        Ok(self)
    }

    pub fn q_model(&self) -> &QModel {
        match &self.elements[self.source].value {
            ReluctanceValue::Eddy { q, .. } => q,
            ReluctanceValue::Fixed(_) => &QModel::Zero,
        }
    }

    fn check_connected(&self) -> Result<()> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.elements {
            if e.from >= self.node_count || e.to >= self.node_count {
                return Err(Error::Topology(format!("element `{}` references a missing node", e.label)));
            }
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &m in &adj[n] {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(n) => Err(Error::Topology(format!("node {n} is not connected to the circuit"))),
            None => Ok(()),
        }
    }

    /// Solve for branch fluxes at `omega` with terminal current `current`.
    ///
    /// Modified nodal form: unknowns are the node potentials (node 0
    /// grounded) and every branch flux, so zero-reluctance branches are fine.
    pub fn solve_flux(&self, current: Complex64, omega: f64) -> Result<FluxSolution> {
        self.check_connected()?;
        let nn = self.node_count - 1;
        let ne = self.elements.len();
        let n = nn + ne;
        let mut a = Mat::<Complex64>::zeros(n, n);
        let mut rhs = Mat::<Complex64>::zeros(n, 1);
        let one = Complex64::new(1.0, 0.0);
        for (k, e) in self.elements.iter().enumerate() {
            let col = nn + k;
            // flux conservation rows
            if e.from > 0 {
                a[(e.from - 1, col)] += one;
            }
            if e.to > 0 {
                a[(e.to - 1, col)] -= one;
            }
            // branch law: u_from - u_to + F = R φ
            let row = nn + k;
            if e.from > 0 {
                a[(row, e.from - 1)] += one;
            }
            if e.to > 0 {
                a[(row, e.to - 1)] -= one;
            }
            a[(row, col)] -= e.value.eval(omega)?;
            rhs[(row, 0)] = -current * e.mmf_per_amp;
        }
        let x = a.partial_piv_lu().solve(&rhs);
        if (0..n).any(|i| !x[(i, 0)].re.is_finite() || !x[(i, 0)].im.is_finite()) {
            return Err(Error::Singular("reluctance network matrix is singular".into()));
        }
        let mut potentials = vec![Complex64::new(0.0, 0.0); self.node_count];
        for i in 0..nn {
            potentials[i + 1] = x[(i, 0)];
        }
        let flux: Vec<Complex64> = (0..ne).map(|k| x[(nn + k, 0)]).collect();
        let source_flux = flux[self.source];
        let mmf = current * self.elements[self.source].mmf_per_amp;
        if source_flux.norm() == 0.0 {
            return Err(Error::Singular("no flux through the source branch".into()));
        }
        Ok(FluxSolution {
            omega,
            current,
            potentials,
            flux,
            source_flux,
            total_reluctance: mmf / source_flux,
        })
    }

    /// Total reluctance seen by the source at `omega`.
    pub fn total_reluctance(&self, omega: f64) -> Result<Complex64> {
        Ok(self.solve_flux(Complex64::new(1.0, 0.0), omega)?.total_reluctance)
    }

    /// `R_0`, the source-seen reluctance with eddy elements removed.
    pub fn zero_freq_reluctance(&self) -> Result<f64> {
        Ok(self.total_reluctance(0.0)?.re)
    }
}

/// `L_0 = N² / R_0`.
pub fn zero_freq_inductance(network: &ReluctanceNetwork, turns: u32) -> Result<f64> {
    let n = f64::from(turns);
    Ok(n * n / network.zero_freq_reluctance()?)
}

/// `R_t(jω) = R_0 (1 + Q(jω))`.
pub fn apply_q(network: &ReluctanceNetwork, q: &QModel, omega: f64) -> Result<Complex64> {
    let r0 = network.zero_freq_reluctance()?;
    Ok((q.eval(omega)? + 1.0) * r0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalPoint {
    pub omega: f64,
    pub q: Complex64,
    pub total_reluctance: Complex64,
    /// `Z = V_L / I_L`.
    pub impedance: Complex64,
    /// `N² / R_t(jω)`.
    pub inductance: Complex64,
    /// `Im(Z - R_L) / ω` (equals `L_0` at ω = 0).
    pub apparent_inductance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalImpedance {
    pub lead_resistance: f64,
    pub zero_freq_inductance: f64,
    pub points: Vec<TerminalPoint>,
}

/// Solve the coupled electric–magnetic system
/// `[[R_L, jωN], [-N, R_t]]·[I, φ] = [V, 0]` for a unit voltage at each ω.
pub fn terminal_impedance(
    lead_resistance: f64,
    turns: u32,
    network: &ReluctanceNetwork,
    q: &QModel,
    omegas: &[f64],
) -> Result<TerminalImpedance> {
    let n = f64::from(turns);
    let r0 = network.zero_freq_reluctance()?;
    let l0 = n * n / r0;
    let mut points = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!("angular frequency must be finite and >= 0, got {omega}")));
        }
        let qv = q.eval(omega)?;
        let rt = (qv + 1.0) * r0;
        let jwn = Complex64::new(0.0, omega * n);
        let det = rt * lead_resistance + jwn * n;
        if det.norm() <= f64::EPSILON * (rt.norm() * lead_resistance.abs() + (omega * n * n).abs()).max(f64::MIN_POSITIVE)
        {
            return Err(Error::Singular(format!(
                "coupled system is singular at ω = {omega} with R_L = {lead_resistance}"
            )));
        }
        // Cramer's rule with V = 1
        let current = rt / det;
        let z = 1.0 / current;
        let inductance = Complex64::new(n * n, 0.0) / rt;
        let apparent = if omega > 0.0 { (z.im) / omega } else { l0 };
        points.push(TerminalPoint {
            omega,
            q: qv,
            total_reluctance: rt,
            impedance: z,
            inductance,
            apparent_inductance: apparent,
        });
    }
    Ok(TerminalImpedance {
        lead_resistance,
        zero_freq_inductance: l0,
        points,
    })
}
