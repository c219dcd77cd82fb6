//! Built-in catalog of worked examples, each with its documented expected
//! verdicts. The `u4-remark-frame` preset carries an interpretive note: the
//! published frame for U(2n) is linearly dependent as printed, and the
//! shipped variant adds the central generator to the last frame vector.

use std::collections::BTreeMap;

use serde_json::json;

use hkt_core::joyce::{default_u_frame, joyce_decompose};
use hkt_core::lie::{build_algebra, Algebra, FactorSpec, Family};

use crate::config::{
    AlgebraConfig, CheckName, Expected, FactorConfig, FrameSpec, IsotropyConfig, JobConfig,
    MetricConfig, VSpec, VectorConfig, DEFAULT_TOLERANCE,
};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub interpretive: Option<&'static str>,
    pub config: JobConfig,
}

fn base_config(factors: Vec<(&str, usize)>, center: usize, metric: MetricConfig) -> JobConfig {
    JobConfig {
        algebra: AlgebraConfig {
            factors: factors
                .into_iter()
                .map(|(f, r)| FactorConfig {
                    family: f.to_string(),
                    rank: r,
                })
                .collect(),
            center_dim: center,
        },
        isotropy: None,
        k_phases: None,
        metric,
        checks: CheckName::all(),
        expect: BTreeMap::new(),
        tolerance: DEFAULT_TOLERANCE,
        seed: 0,
    }
}

fn expect_fail(config: &mut JobConfig, checks: &[CheckName]) {
    for &c in checks {
        config.expect.insert(c, Expected::Fail);
    }
}

/// The twisted U(4) frame: `X_1^1 = (2/|a_1|) Y^1`,
/// `X_1^2 = (2/|a_2|)(Y^1 + Y^2)` with `Y^1` a `-B`-unit vector of the
/// semisimple centralizer and `Y^2` the central generator.
fn u4_twisted_frame() -> Vec<VectorConfig> {
    let model = build_algebra(&[FactorSpec::new(Family::A, 3)], 1).unwrap();
    let algebra = Algebra::new(model).unwrap();
    let decomp = joyce_decompose(&algebra);
    let base = default_u_frame(&algebra, &decomp, 2, &[]).unwrap();
    let dim = algebra.model.cartan_dim();
    let minus_b = |x: &nalgebra::DVector<hkt_core::lie::C64>| -> f64 {
        -algebra.model.cartan_killing(x, x).re
    };
    let y1 = {
        let mut v = base[0].clone();
        let s = 1.0 / minus_b(&v).sqrt();
        v *= hkt_core::lie::C64::new(s, 0.0);
        v
    };
    let y2 = {
        let mut v = nalgebra::DVector::from_element(dim, hkt_core::lie::C64::new(0.0, 0.0));
        v[algebra.model.rank] = hkt_core::lie::C64::new(0.0, 1.0);
        v
    };
    let scale = |j: usize| 2.0 / algebra.model.norm2(decomp.layers[j].alpha).sqrt();
    let x1 = &y1 * hkt_core::lie::C64::new(scale(0), 0.0);
    let x2 = (&y1 + &y2) * hkt_core::lie::C64::new(scale(1), 0.0);
    [x1, x2]
        .iter()
        .map(|v| v.iter().map(|c| [c.re, c.im]).collect())
        .collect()
}

pub fn catalog() -> Vec<Preset> {
    let mut presets = Vec::new();

    // SU(3): one layer; the Einstein metric is a multiple of the
    // bi-invariant one, so every check passes.
    presets.push(Preset {
        name: "su3-group",
        description: "SU(3) with trivial isotropy and the HKT-Einstein metric (1/3)",
        interpretive: None,
        config: base_config(vec![("A", 2)], 0, MetricConfig::Named("einstein".into())),
    });

    // SU(5) with the reference metric h = -B: bi-invariant, hence strong and
    // parallel, but not Einstein.
    let mut su5_group = base_config(vec![("A", 4)], 0, MetricConfig::Named("reference".into()));
    expect_fail(&mut su5_group, &[CheckName::Einstein]);
    presets.push(Preset {
        name: "su5-group",
        description: "SU(5) with the bi-invariant reference metric",
        interpretive: None,
        config: su5_group,
    });

    // SU(5) with the Einstein metric (2/5, 1/5): unequal layer coefficients
    // in one component, so parallel-torsion and strong both fail.
    let mut su5_einstein = base_config(vec![("A", 4)], 0, MetricConfig::Named("einstein".into()));
    expect_fail(
        &mut su5_einstein,
        &[
            CheckName::Btp,
            CheckName::Bas,
            CheckName::Strong,
            CheckName::NaturallyReductive,
        ],
    );
    presets.push(Preset {
        name: "su5-einstein",
        description: "SU(5) with the HKT-Einstein metric (2/5, 1/5)",
        interpretive: None,
        config: su5_einstein,
    });

    // SU(4)/SU(2): one retained layer; Einstein holds up to scale, but the
    // coset is not a Lie group so no metric is strong.
    let mut su4 = base_config(vec![("A", 3)], 0, MetricConfig::Named("einstein".into()));
    su4.isotropy = Some(IsotropyConfig {
        m: 1,
        v_subspace: VSpec::Named("none".into()),
        u_frame: FrameSpec::Named("biinvariant".into()),
    });
    expect_fail(&mut su4, &[CheckName::Strong]);
    presets.push(Preset {
        name: "su4-mod-su2",
        description: "SU(4)/SU(2) with the HKT-Einstein metric (3/8)",
        interpretive: None,
        config: su4,
    });

    // SU(3) x SU(3) x T^2 with the torus as isotropy and per-factor
    // coefficients (5, 2): parallel and strong, but not Einstein.
    let mut product = base_config(
        vec![("A", 2), ("A", 2)],
        2,
        MetricConfig::Layer {
            layer: vec![5.0, 2.0],
        },
    );
    product.isotropy = Some(IsotropyConfig {
        m: 2,
        v_subspace: VSpec::Named("center".into()),
        u_frame: FrameSpec::Named("biinvariant".into()),
    });
    expect_fail(&mut product, &[CheckName::Einstein]);
    presets.push(Preset {
        name: "su3xsu3-product",
        description: "SU(3) x SU(3) x T^2 / T^2 with per-factor coefficients (5, 2)",
        interpretive: None,
        config: product,
    });

    // U(4) with the twisted frame: strong HKT without bi-invariance.
    let mut u4 = base_config(vec![("A", 3)], 1, MetricConfig::Named("reference".into()));
    u4.isotropy = Some(IsotropyConfig {
        m: 2,
        v_subspace: VSpec::Named("none".into()),
        u_frame: FrameSpec::Explicit(u4_twisted_frame()),
    });
    expect_fail(
        &mut u4,
        &[CheckName::Einstein, CheckName::NaturallyReductive],
    );
    presets.push(Preset {
        name: "u4-remark-frame",
        description: "U(4) with the twisted frame: strong HKT, yet not naturally reductive",
        interpretive: Some(
            "the published frame X_1^n = (2/|a_n|)(Y^1 + ... + Y^{n-1}) is linearly \
             dependent as printed and never uses the central generator; this preset \
             ships the reading X_1^n = (2/|a_n|)(Y^1 + ... + Y^{n-1} + Y^n)",
        ),
        config: u4,
    });

    // U(2): the smallest hypercomplex group; everything passes.
    presets.push(Preset {
        name: "u2-group",
        description: "U(2) with the reference metric (no decomposable layer root)",
        interpretive: None,
        config: base_config(vec![("A", 1)], 1, MetricConfig::Named("reference".into())),
    });

    // Sp(2) x T^2: a non-A-type instance with b_d equal to the center, so
    // the reference metric is bi-invariant and strong; Einstein needs
    // (1/3, 1/6) instead.
    let mut sp2 = base_config(vec![("C", 2)], 2, MetricConfig::Named("reference".into()));
    expect_fail(&mut sp2, &[CheckName::Einstein]);
    presets.push(Preset {
        name: "sp2xt2-group",
        description: "Sp(2) x T^2 with the bi-invariant reference metric",
        interpretive: None,
        config: sp2,
    });

    presets
}

pub fn find(name: &str) -> Option<Preset> {
    catalog().into_iter().find(|p| p.name == name)
}

pub fn catalog_json() -> serde_json::Value {
    let entries: Vec<serde_json::Value> = catalog()
        .iter()
        .map(|p| {
            json!({
                "name": p.name,
                "description": p.description,
                "interpretive": p.interpretive,
                "expected_failures": p.config.expect.keys().map(|k| k.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "presets": entries })
}
