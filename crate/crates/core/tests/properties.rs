use std::collections::BTreeSet;

use biver::assertions::eval_rformula;
use biver::gen::{random_vars, Gen, GenConfig};
use biver::oracle::{check_aa, check_ae, initial_stores, wlp_table, Bounds, Verdict};
use biver::semantics::{eval_bicom, eval_product, BiOutcome, Domain, Outcome};
use biver::structure::{
    bicom_vars, bieq, bileft, biright, kateq, left_proj, right_proj, size_bicom, size_cmd,
};
use biver::syntax::*;
use biver::transform::chk;
use biver::translate::{merge, split, to_unary};
use biver::vcgen::vc_bicom;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn with_gen<T>(seed: u64, cfg: impl FnOnce(GenConfig) -> GenConfig, f: impl FnOnce(&mut Gen<'_, StdRng>, &[Var]) -> T) -> T {
    let mut rng = StdRng::seed_from_u64(seed);
    let vars = random_vars(&mut rng, 3);
    let cfg = cfg(GenConfig::new(vars.clone()));
    let mut g = Gen::new(&mut rng, &cfg);
    f(&mut g, &vars)
}

fn small() -> Bounds {
    Bounds::new(Domain::new(-1, 1), 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        with_gen(seed, |c| c, |g, vars| {
            let c = g.command(4);
            assert_eq!(parse_command(&c.to_string(), vars).unwrap(), c, "{c}");
            let b = g.bicom(4);
            assert_eq!(parse_bicom(&b.to_string(), vars).unwrap(), b, "{b}");
            let p = g.rformula(3);
            assert_eq!(parse_rformula(&p.to_string(), vars).unwrap(), p, "{p}");
            let e = g.expr_int(3);
            assert_eq!(parse_expr(&e.to_string(), vars).unwrap(), e, "{e}");
        });
    }

    #[test]
    fn projection_identities_and_size(seed in any::<u64>()) {
        with_gen(seed, |c| c, |g, _| {
            let b = g.bicom(4);
            prop_assert_eq!(left_proj(&bileft(&b)), left_proj(&b));
            prop_assert_eq!(right_proj(&bileft(&b)), Command::Skip);
            prop_assert_eq!(right_proj(&biright(&b)), right_proj(&b));
            prop_assert!(kateq(&left_proj(&biright(&b)), &Command::Skip));
            prop_assert!(size_bicom(&bileft(&b)) <= size_bicom(&b));
            prop_assert!(size_bicom(&biright(&b)) <= size_bicom(&b));
            prop_assert!(size_cmd(&left_proj(&b)) <= size_bicom(&b));
            Ok(())
        })?;
    }

    #[test]
    fn chk_commutes_with_biprojections(seed in any::<u64>()) {
        with_gen(seed, |c| c, |g, vars| {
            let b = g.bicom(4);
            let c = chk(&b, vars).unwrap();
            prop_assert_eq!(biright(&c), chk(&biright(&b), vars).unwrap());
            prop_assert!(bieq(&bileft(&c), &chk(&bileft(&b), vars).unwrap()));
            // chk only adds checks, so the left program is unchanged.
            prop_assert!(kateq(&left_proj(&c), &left_proj(&b)));
            Ok(())
        })?;
    }

    #[test]
    fn strengthening_post_strengthens_pre(seed in any::<u64>()) {
        with_gen(seed, |c| c.loop_free().depth(3), |g, vars| {
            let b = g.bicom(3);
            let post = g.rformula(1);
            let stronger = RelFormula::and(post.clone(), g.rformula(1));
            let weak = vc_bicom(&b, &post).unwrap().pre_formula();
            let strong = vc_bicom(&b, &stronger).unwrap().pre_formula();
            let dom = Domain::new(-1, 1);
            let stores = initial_stores(vars, &bicom_vars(&b), &small());
            for s in &stores {
                for t in &stores {
                    if eval_rformula(&strong, s, t, &dom).unwrap() {
                        prop_assert!(eval_rformula(&weak, s, t, &dom).unwrap(), "{} | {}", s, t);
                    }
                }
            }
            Ok(())
        })?;
    }

    #[test]
    fn vc_agrees_with_wlp_table(seed in any::<u64>()) {
        with_gen(seed, |c| c.loop_free().depth(3), |g, vars| {
            let b = g.bicom(3);
            let post = g.rformula(1);
            let pre = vc_bicom(&b, &post).unwrap().pre_formula();
            let bounds = small();
            for (s, t, cell) in wlp_table(&b, &post, vars, &bounds).unwrap() {
                let got = eval_rformula(&pre, &s, &t, &bounds.dom).unwrap();
                prop_assert_eq!(Some(got), cell, "{} | {}", s, t);
            }
            Ok(())
        })?;
    }

    #[test]
    fn product_program_bisimulates(seed in any::<u64>()) {
        with_gen(seed, |c| c.quantifier_free().depth(3), |g, vars| {
            let b = g.bicom(3);
            let p = to_unary(&b).unwrap();
            let bounds = small();
            let stores = initial_stores(vars, &bicom_vars(&b), &bounds);
            for s in &stores {
                for t in &stores {
                    let direct = eval_bicom(&b, s, t, &bounds.dom, bounds.fuel).unwrap();
                    let via = eval_product(&p, &merge(s, t), &bounds.dom, bounds.fuel).unwrap();
                    if direct.exhausted || via.exhausted {
                        continue;
                    }
                    let mapped: BTreeSet<BiOutcome> = via
                        .outcomes
                        .into_iter()
                        .map(|o| match o {
                            Outcome::Normal(m) => {
                                let (a, b) = split(&m);
                                BiOutcome::Normal(a, b)
                            }
                            Outcome::Fail => BiOutcome::Fail,
                        })
                        .collect();
                    prop_assert_eq!(&mapped, &direct.outcomes, "{} | {}", s, t);
                }
            }
            Ok(())
        })?;
    }

    #[test]
    fn bieq_variants_have_equal_outcomes(seed in any::<u64>()) {
        with_gen(seed, |c| c.depth(3), |g, vars| {
            let b = g.bicom(3);
            let v = g.bi_variant(&b);
            prop_assert!(bieq(&b, &v));
            let bounds = small();
            let stores = initial_stores(vars, &bicom_vars(&b), &bounds);
            for (i, s) in stores.iter().enumerate().step_by(3) {
                let t = &stores[(i * 5) % stores.len()];
                let r1 = eval_bicom(&b, s, t, &bounds.dom, bounds.fuel).unwrap();
                let r2 = eval_bicom(&v, s, t, &bounds.dom, bounds.fuel).unwrap();
                prop_assert_eq!(r1.outcomes, r2.outcomes);
            }
            Ok(())
        })?;
    }

    /// A valid forall-forall embed of two programs that always terminate
    /// normally gives a valid forall-exists judgment.
    #[test]
    fn terminating_aa_implies_ae(seed in any::<u64>()) {
        with_gen(seed, |c| c.loop_free().depth(3), |g, vars| {
            let c = g.command(3);
            let d = g.command(3);
            let pre = g.full_agreement();
            let post = g.agreement();
            let bounds = small();
            let aa = check_aa(&Bicom::Embed(c.clone(), d.clone()), &pre, &post, vars, &bounds).unwrap();
            if aa == Verdict::HoldsBounded {
                let ae = check_ae(&c, &d, &pre, &post, vars, &bounds).unwrap();
                prop_assert!(!ae.fails(), "{}", ae);
            }
            Ok(())
        })?;
    }
}
