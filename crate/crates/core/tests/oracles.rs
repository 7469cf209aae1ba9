mod common;

use common::{random_model, random_profile, rel_gap, Sym};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tokenscreen::cost::{cost, cost_numeric_oracle, cost_threshold, CostKind, OracleOptions};
use tokenscreen::efficient::{
    efficient_allocation, efficient_allocation_numeric, social_surplus, EfficientPlan, NumericOptions, SegmentTokens,
};
use tokenscreen::model::{efficient_finetune_threshold, TaskProfile};

fn plan_gap(a: &EfficientPlan, b: &EfficientPlan, base: f64) -> f64 {
    let mut g = rel_gap(a.surplus, b.surplus, 1e-12);
    g = g.max(rel_gap(a.total_input, b.total_input, 1e-12));
    g = g.max(rel_gap(a.total_output, b.total_output, 1e-12));
    // fine-tuning is measured against the base it adds to
    g.max(rel_gap(a.finetune, b.finetune, base))
}

#[test]
fn efficient_closed_form_matches_numeric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut finetuned = 0;
    let mut n = 0;
    while n < 200 {
        let (p, c) = random_model(&mut rng);
        let prof = random_profile(&mut rng, 6).scaled(10f64.powf(rng.gen_range(-1.0..2.0))).unwrap();
        let closed = efficient_allocation(&prof, &p, &c);
        if closed.finetune > 1e9 {
            continue;
        }
        n += 1;
        let num = efficient_allocation_numeric(&prof, &p, &c, &NumericOptions::default()).unwrap();
        let g = plan_gap(&closed, &num, p.base());
        assert!(g <= 1e-6, "{p:?} {c:?} {prof:?}: gap {g:e}");
        if closed.is_finetuned() {
            finetuned += 1;
        }
        assert_eq!(closed.is_finetuned(), closed.theta > efficient_finetune_threshold(&p, &c));
    }
    assert!(finetuned > 40 && finetuned < 160, "{finetuned} of 200 fine-tuned");
}

#[test]
fn efficient_plan_survives_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let (p, c) = random_model(&mut rng);
        let prof = random_profile(&mut rng, 5).scaled(10f64.powf(rng.gen_range(-1.0..2.0))).unwrap();
        let plan = efficient_allocation(&prof, &p, &c);
        if plan.finetune > 1e9 {
            continue;
        }
        let best = social_surplus(&plan, &prof, &p, &c).unwrap();
        for _ in 0..50 {
            let mut alt = plan.clone();
            let mut f = || (rng.gen_range(-0.05..0.05f64)).exp();
            alt.segments = plan.segments.iter().map(|t| SegmentTokens { x: t.x * f(), y: t.y * f() }).collect();
            alt.finetune = (plan.finetune + rng.gen_range(-0.05..0.05) * (p.base() + plan.finetune)).max(0.0);
            let s = social_surplus(&alt, &prof, &p, &c).unwrap();
            assert!(s <= best + 1e-12 * best.abs().max(1.0), "perturbed surplus {s} beats {best}");
        }
    }
}

#[test]
fn cost_closed_forms_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let opts = OracleOptions::default();
    for _ in 0..500 {
        let (p, c) = random_model(&mut rng);
        let kind = match rng.gen_range(0..3) {
            0 => CostKind::WithFloor,
            1 => CostKind::Contractible { scale: rng.gen_range(0.05..1.0) },
            _ => CostKind::Package,
        };
        let hat = cost_threshold(kind, &p, &c).unwrap();
        let q = hat * rng.gen_range(0.1..4.0f64);
        let exact = cost(kind, q, &p, &c).unwrap();
        let num = cost_numeric_oracle(kind, q, &p, &c, &opts).unwrap();
        let g = rel_gap(exact.total, num.breakdown.total, 1e-12);
        assert!(g <= 1e-6, "{kind:?} q {q} (hat {hat}) {p:?} {c:?}: {} vs {} ({g:e})", exact.total, num.breakdown.total);
        assert_eq!(exact.finetuned, !num.floor_binds || q > hat * (1.0 + 1e-6), "{kind:?} at q/hat {}", q / hat);
    }
}

#[test]
fn example_costs_on_grid() {
    let sym = Sym::EXAMPLE;
    let (p, c) = (sym.params(), sym.costs());
    let opts = OracleOptions::default();
    for s in [0.3, 1.0] {
        for q in [0.1, 1.0, 8.0] {
            for kind in [CostKind::WithFloor, CostKind::Contractible { scale: s }, CostKind::Package] {
                let exact = cost(kind, q, &p, &c).unwrap();
                let num = cost_numeric_oracle(kind, q, &p, &c, &opts).unwrap();
                assert!(rel_gap(exact.total, num.breakdown.total, 1e-12) <= 1e-7, "{kind:?} q {q}");
            }
        }
    }
    // totals at the top package: X = Y = 16, Z = 15
    let top = cost(CostKind::Package, 8.0, &p, &c).unwrap();
    assert!((top.x - 16.0).abs() < 1e-10 && (top.z - 15.0).abs() < 1e-10);
    let one = TaskProfile::constant(1.0).unwrap();
    let plan = efficient_allocation(&one, &p, &c);
    assert!((plan.surplus - 2.125).abs() < 1e-12);
}
