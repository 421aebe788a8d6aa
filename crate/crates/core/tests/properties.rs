use proptest::prelude::*;

use wsint::diagnostics::{anova_from_ss, anova_table, circularity_report, Source, DEFAULT_RATIO_THRESHOLD};
use wsint::intervals::{
    between_subject_ci, cousineau_morey_interval, difference_variance, heteroscedastic_hdi, length_ratio,
    within_subject_ci, large_sample_hdi, pairwise_difference_ci, within_subject_hdi, DfChoice,
};
use wsint::io::{parse_dataset, to_long_csv, to_wide_csv, DatasetSpec};
use wsint::posterior::{conditional_posterior, modified_posterior_probability, Model, Prior};
use wsint::tdist::{hdi, t_cdf, ScaledTPosterior};
use wsint::{interaction_ss_raw_moment, standardize, summarize, IntervalEstimate, RepeatedMeasuresTable};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn table(max_n: usize, max_c: usize) -> impl Strategy<Value = RepeatedMeasuresTable> {
    (2..=max_n, 2..=max_c).prop_flat_map(|(n, c)| {
        prop::collection::vec(prop::collection::vec(-100.0..100.0f64, c), n)
            .prop_map(|rows| RepeatedMeasuresTable::from_rows(rows).unwrap())
    })
}

fn table_with_order(max_n: usize, max_c: usize) -> impl Strategy<Value = (RepeatedMeasuresTable, Vec<usize>)> {
    table(max_n, max_c).prop_flat_map(|t| {
        let order = Just((0..t.n_subjects()).collect::<Vec<_>>()).prop_shuffle();
        (Just(t), order)
    })
}

fn level() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.5, 0.8, 0.9, 0.95, 0.99])
}

type Estimator = fn(&RepeatedMeasuresTable, usize, f64) -> IntervalEstimate;

fn estimators() -> [(&'static str, Estimator); 6] {
    [
        ("between", |t, j, l| between_subject_ci(&summarize(t), j, l).unwrap()),
        ("wsci", |t, j, l| within_subject_ci(&summarize(t), j, l).unwrap()),
        ("hdi", |t, j, l| within_subject_hdi(&summarize(t), j, l).unwrap()),
        ("large-sample", |t, j, l| large_sample_hdi(&summarize(t), j, l).unwrap()),
        ("hetero", |t, j, l| heteroscedastic_hdi(&standardize(t), j, l).unwrap()),
        ("cm", |t, j, l| {
            cousineau_morey_interval(&standardize(t), j, l, DfChoice::InteractionDf, true).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ss_decomposition(t in table(30, 30)) {
        let s = summarize(&t);
        let by_difference = s.ss_total - s.ss_subjects - s.ss_conditions;
        prop_assert!(close(interaction_ss_raw_moment(&t), by_difference, 1e-9));
        prop_assert!(close(s.ss_interaction, by_difference, 1e-9));
    }

    #[test]
    fn standardize_is_idempotent(t in table(30, 10)) {
        let once = standardize(&t);
        let twice = standardize(once.as_table());
        for (a, b) in once.values().iter().zip(twice.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn standardize_keeps_interaction(t in table(30, 10)) {
        let std = standardize(&t);
        let after = summarize(std.as_table());
        prop_assert!(close(after.ss_interaction, std.source_stats().ss_interaction, 1e-9));
        prop_assert!(after.ss_subjects <= 1e-9 * after.ss_total);
        for (a, b) in after.condition_means.iter().zip(&std.source_stats().condition_means) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn ss_shift_invariant(t in table(30, 10), delta in -1e4..1e4f64) {
        let a = summarize(&t);
        let b = summarize(&t.shifted(delta));
        for (x, y) in [
            (a.ss_total, b.ss_total),
            (a.ss_subjects, b.ss_subjects),
            (a.ss_conditions, b.ss_conditions),
            (a.ss_interaction, b.ss_interaction),
        ] {
            prop_assert!(close(x, y, 1e-9), "{x} vs {y}");
        }
    }

    #[test]
    fn hdi_shorter_than_lm_with_shared_center(t in table(50, 10), level in level()) {
        let s = summarize(&t);
        let r = length_ratio(t.n_subjects(), t.n_conditions(), level).unwrap();
        for j in 0..t.n_conditions() {
            let wsci = within_subject_ci(&s, j, level).unwrap();
            let h = within_subject_hdi(&s, j, level).unwrap();
            prop_assert!(h.half_width < wsci.half_width);
            prop_assert!(close(h.half_width / wsci.half_width, r, 1e-12));
            prop_assert_eq!(wsci.center, s.condition_means[j]);
            prop_assert_eq!(h.center, s.condition_means[j]);
        }
    }

    #[test]
    fn pooled_difference_is_sqrt2_lm(t in table(50, 10), level in level()) {
        let s = summarize(&t);
        let wsci = within_subject_ci(&s, 0, level).unwrap().half_width;
        let d = pairwise_difference_ci(&t, 0, t.n_conditions() - 1, level, true).unwrap();
        prop_assert!(close(d.half_width, std::f64::consts::SQRT_2 * wsci, 1e-12));
    }

    #[test]
    fn estimators_invariant_under_row_permutation((t, order) in table_with_order(30, 6), level in level()) {
        let p = t.permuted(&order).unwrap();
        for (name, f) in estimators() {
            for j in 0..t.n_conditions() {
                let (a, b) = (f(&t, j, level), f(&p, j, level));
                prop_assert!(close(a.center, b.center, 1e-9) || (a.center - b.center).abs() < 1e-9, "{name}");
                prop_assert!(close(a.half_width, b.half_width, 1e-9), "{name}");
            }
        }
    }

    #[test]
    fn estimators_equivariant_under_shift(t in table(30, 6), delta in -1e4..1e4f64, level in level()) {
        let s = t.shifted(delta);
        for (name, f) in estimators() {
            for j in 0..t.n_conditions() {
                let (a, b) = (f(&t, j, level), f(&s, j, level));
                prop_assert!((b.center - (a.center + delta)).abs() <= 1e-9 * (1.0 + delta.abs()), "{name}");
                prop_assert!(close(a.half_width, b.half_width, 1e-9), "{name}");
            }
        }
    }

    #[test]
    fn anova_df_identities(n in 2usize..=50, c in 2usize..=10, ss in prop::array::uniform3(0.1..1e4f64)) {
        let a = anova_from_ss(ss[0], ss[1], ss[2], n, c);
        let df = |src| a.row(src).df;
        prop_assert_eq!(df(Source::Subjects), n - 1);
        prop_assert_eq!(df(Source::Conditions), c - 1);
        prop_assert_eq!(df(Source::SxC), (n - 1) * (c - 1));
        prop_assert_eq!(df(Source::Total), n * c - 1);
        prop_assert_eq!(df(Source::Subjects) + df(Source::Conditions) + df(Source::SxC), df(Source::Total));
        prop_assert!(close(a.row(Source::Total).ss, ss[0] + ss[1] + ss[2], 1e-15));
    }

    #[test]
    fn anova_from_table_is_consistent(t in table(30, 8)) {
        let s = summarize(&t);
        let a = anova_table(&s, t.n_subjects(), t.n_conditions());
        let f = a.f_conditions().unwrap();
        prop_assert!(close(f, (s.ss_conditions / (t.n_conditions() - 1) as f64) / s.ms_interaction(), 1e-12));
    }

    #[test]
    fn difference_variance_identity(t in table(30, 8)) {
        let n = t.n_subjects() as f64;
        let s = summarize(&t);
        for j in 0..t.n_conditions() {
            for l in (j + 1)..t.n_conditions() {
                let cov = t.rows()
                    .map(|r| (r[j] - s.condition_means[j]) * (r[l] - s.condition_means[l]))
                    .sum::<f64>() / (n - 1.0);
                let expected = s.condition_variances[j] + s.condition_variances[l] - 2.0 * cov;
                let got = difference_variance(&t, j, l);
                let scale = s.condition_variances[j] + s.condition_variances[l];
                prop_assert!((got - expected).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn circularity_invariances((t, order) in table_with_order(30, 6), shifts in prop::collection::vec(-1e3..1e3f64, 30)) {
        let base = circularity_report(&t, DEFAULT_RATIO_THRESHOLD);
        prop_assert_eq!(base.pairwise_diff_variances.len(), t.n_conditions() * (t.n_conditions() - 1) / 2);
        prop_assert!(base.max_min_diff_variance_ratio >= 1.0);

        let permuted = circularity_report(&t.permuted(&order).unwrap(), DEFAULT_RATIO_THRESHOLD);
        let rows: Vec<Vec<f64>> = t.rows().zip(&shifts).map(|(r, d)| r.iter().map(|v| v + d).collect()).collect();
        let per_subject = circularity_report(&RepeatedMeasuresTable::from_rows(rows).unwrap(), DEFAULT_RATIO_THRESHOLD);
        prop_assert_eq!(permuted.advisory, base.advisory);
        prop_assert!(close(per_subject.max_min_diff_variance_ratio, base.max_min_diff_variance_ratio, 1e-9));
        for other in [&permuted, &per_subject] {
            for (a, b) in base.pairwise_diff_variances.iter().zip(&other.pairwise_diff_variances) {
                prop_assert!(close(a.variance, b.variance, 1e-9));
            }
        }
    }

    #[test]
    fn wide_and_long_round_trip(t in table(20, 6)) {
        let wide = parse_dataset(&to_wide_csv(&t), &DatasetSpec::wide("mem.csv")).unwrap();
        let long = parse_dataset(&to_long_csv(&t), &DatasetSpec::long("mem.csv")).unwrap();
        prop_assert_eq!(&wide, &t);
        prop_assert_eq!(&long, &t);
    }

    #[test]
    fn posterior_hdi_matches_closed_forms(t in table(40, 8), level in level()) {
        let s = summarize(&t);
        let std = standardize(&t);
        let jeff = conditional_posterior(&t, Model::Homoscedastic, Prior::Jeffreys).unwrap();
        let wsci = conditional_posterior(&t, Model::Homoscedastic, Prior::Improper).unwrap();
        let het = conditional_posterior(&t, Model::Heteroscedastic, Prior::PerConditionJeffreys).unwrap();
        for j in 0..t.n_conditions() {
            for (post, closed) in [
                (&jeff, within_subject_hdi(&s, j, level).unwrap()),
                (&wsci, within_subject_ci(&s, j, level).unwrap()),
                (&het, heteroscedastic_hdi(&std, j, level).unwrap()),
            ] {
                let iv = post.hdi(j, level).unwrap();
                prop_assert!(close(iv.half_width, closed.half_width, 1e-12));
                prop_assert!((iv.center - closed.center).abs() <= 1e-12 * (1.0 + closed.center.abs()));
                prop_assert!((modified_posterior_probability(post, j, &iv).unwrap() - level).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn modified_probability_monotone_for_nested(t in table(30, 5), a in 0.05..0.9f64, b in 0.05..0.9f64) {
        let post = conditional_posterior(&t, Model::Homoscedastic, Prior::Jeffreys).unwrap();
        let (inner, outer) = if a < b { (a, b) } else { (b, a) };
        let s = summarize(&t);
        let small = within_subject_hdi(&s, 0, inner).unwrap();
        let large = within_subject_hdi(&s, 0, outer.max(inner + 0.05)).unwrap();
        prop_assert!(modified_posterior_probability(&post, 0, &small).unwrap()
            <= modified_posterior_probability(&post, 0, &large).unwrap());
    }

    #[test]
    fn scaled_t_hdi_mass(loc in -1e3..1e3f64, scale_sq in 1e-4..1e4f64, df in 1u64..500, level in level()) {
        let dist = ScaledTPosterior::new(loc, scale_sq, df).unwrap();
        let iv = hdi(&dist, level).unwrap();
        let z = |x: f64| (x - loc) / dist.scale();
        let mass = t_cdf(df, z(iv.upper)) - t_cdf(df, z(iv.lower));
        prop_assert!((mass - level).abs() < 1e-10);
    }
}

#[test]
fn length_ratio_scan_in_unit_interval() {
    for n in 2..=50 {
        for c in 2..=10 {
            for level in [0.8, 0.9, 0.95, 0.99] {
                let r = length_ratio(n, c, level).unwrap();
                assert!(r > 0.0 && r < 1.0, "N={n} C={c} level={level}: {r}");
            }
        }
    }
}
