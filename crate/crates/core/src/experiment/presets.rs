/// A named configuration reproducing one published study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub reproduces: &'static str,
    pub runtime: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig1_1d_pollution",
        reproduces: "Example 1.1 / Fig. 1 (1D h-FEM pollution)",
        runtime: "seconds",
        text: "method = fem
domain = interval
k = 1,10,100
p = 1,2,3,4
n_elements = 10,20,40,80,160,320,640
",
    },
    Preset {
        name: "fig2_square",
        reproduces: "Example 5.1 / Fig. 2 (square, plane wave, h-FEM)",
        runtime: "minutes",
        text: "method = fem
domain = square
exact = pw2d
k = 4,40,100
p = 1,2,3
h = 0.0625,0.03125,0.015625,0.0078125
",
    },
    Preset {
        name: "fig3_lshape_pfem",
        reproduces: "Example 5.2 / Fig. 3 (L-shape, plane wave, p-FEM, graded and ungraded)",
        runtime: "seconds",
        text: "method = fem
domain = lshape
exact = pw2d
k = 10
p = 1,2,3,4,5,6,7,8
h = 0.4
sigma = 0.125
L = 0,10
",
    },
    Preset {
        name: "lshape_singular",
        reproduces: "Example 5.3 / Fig. 2 bottom right (L-shape, singular Bessel solution, p-FEM)",
        runtime: "seconds",
        text: "method = fem
domain = lshape
exact = bessel_singular
k = 1,10,20
p = 1,2,3,4,5,6,7,8
h = 0.25
",
    },
    Preset {
        name: "uwvf_square",
        reproduces: "UWVF plane-wave DG, alpha = beta = delta = 1/2",
        runtime: "seconds",
        text: "method = pwdg
domain = square
exact = pw2d
flux = uwvf
basis = plane_waves
k = 10
p = 3,5,7,9,11,13
h = 0.25
solver = truncated_svd
",
    },
    Preset {
        name: "ls_square",
        reproduces: "plane-wave Least Squares, w1 = k, w2 = 1",
        runtime: "seconds",
        text: "method = least_squares
domain = square
exact = pw2d
basis = plane_waves
k = 10
p = 3,5,7,9,11,13
h = 0.25
solver = truncated_svd
",
    },
    Preset {
        name: "infsup_1d",
        reproduces: "discrete inf-sup constant vs k, 1D model",
        runtime: "seconds",
        text: "method = infsup
domain = interval
k = 4,8,16,32
p = 1,2
kh_over_p = 0.25
",
    },
    Preset {
        name: "approx_trefftz",
        reproduces: "plane-wave best approximation, h-sweep",
        runtime: "seconds",
        text: "method = approx
domain = square
exact = pw2d
basis = plane_waves
k = 4
p = 3
h = 0.5,0.25,0.125,0.0625
solver = truncated_svd
",
    },
    Preset {
        name: "nodal_exact_1d",
        reproduces: "nodally exact 1D FEM, Example 1.1 data",
        runtime: "seconds",
        text: "method = nodal_exact
domain = interval
k = 10
n_elements = 20,40,80,160,320
",
    },
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub(crate) fn preset_text(name: &str) -> Option<&'static str> {
    preset(name).map(|p| p.text)
}

/// Aligned table of presets.
pub fn list_presets() -> String {
    let w = PRESETS.iter().map(|p| p.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for p in PRESETS {
        out.push_str(&format!("{:<w$}  {:<8}  {}\n", p.name, p.runtime, p.reproduces));
    }
    out
}
