//! Named campaign configurations.

const EXAMPLE1: &str = r#"
# Diagonal(2) without hopping: every eigenvalue is doubly degenerate and
# p_2(I) = |I| for Uniform(0, 1) disorder.
dim = 1
variant = "diagonal"
rank = 2
hopping = 0.0
seed = 20240101

[disorder]
kind = "uniform"
a = 0.0
b = 1.0

[window]
center = 0.5
interval = [-0.5, 0.5]

[run]
boxes = [500]
realizations = 20000
energy_range = [-0.25, 1.25]
energy_points = 61

[output]
dir = "levy-out/example1"
"#;

const EXAMPLE2: &str = r#"
# Matrix-valued model with m = 3: the spectrum of the rank-one chain,
# each level repeated three times.
dim = 1
variant = "matrix-valued"
rank = 3
hopping = 1.0
seed = 20240202

[disorder]
kind = "uniform"
a = 0.0
b = 6.0

[window]
center = 3.0
interval = [-0.5, 0.5]

[run]
boxes = [250]
realizations = 20000

[output]
dir = "levy-out/example2"
"#;

const RANK1_POISSON: &str = r#"
# Rank-one Anderson chain; local statistics are Poisson.
dim = 1
variant = "rank-one-site"
hopping = 1.0
seed = 20240303

[disorder]
kind = "uniform"
a = 0.0
b = 5.0

[window]
center = 2.5
interval = [-0.5, 0.5]

[run]
boxes = [250, 1000]
realizations = 20000

[output]
dir = "levy-out/rank1-poisson"
"#;

const RANK1_STRONG: &str = r#"
# Rank-one chain at strong disorder for the block approximation. Box half
# sides are chosen so that blocks of half side ⌊L^0.45⌋ tile them.
dim = 1
variant = "rank-one-site"
hopping = 1.0
seed = 20240404

[disorder]
kind = "uniform"
a = 0.0
b = 10.0

[window]
center = 5.0
interval = [-4.0, 4.0]

[run]
boxes = [49, 199, 799]
realizations = 2000000
blocks = true
epsilon = 0.1

[output]
dir = "levy-out/rank1-strong"
"#;

const DIMER_1D: &str = r#"
# Random dimer chain: one variable on each pair of neighbouring sites.
dim = 1
variant = "dimer"
hopping = 1.0
seed = 20240505

[disorder]
kind = "uniform"
a = 0.0
b = 4.0

[window]
center = 2.0
interval = [-0.5, 0.5]

[run]
sides = [500, 2000]
realizations = 20000

[output]
dir = "levy-out/dimer-1d"
"#;

const POLYMER_2D: &str = r#"
# Two-dimensional polymer model: one variable per 2x2 block of sites.
dim = 2
variant = "polymer-block"
rank = 4
hopping = 0.5
seed = 20240606

[disorder]
kind = "uniform"
a = 0.0
b = 8.0

[window]
center = 4.0
interval = [-0.5, 0.5]

[run]
sides = [20, 40]
realizations = 5000

[output]
dir = "levy-out/polymer-2d"
"#;

const PRESETS: [(&str, &str); 6] = [
    ("example1", EXAMPLE1),
    ("example2", EXAMPLE2),
    ("rank1-poisson", RANK1_POISSON),
    ("rank1-strong", RANK1_STRONG),
    ("dimer-1d", DIMER_1D),
    ("polymer-2d", POLYMER_2D),
];

/// TOML text of a named preset.
pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
