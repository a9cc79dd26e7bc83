//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the binary
//! exits non-zero if any criterion fails.

mod common;

use std::collections::HashSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simgroup::checks::{self, TransitionMatrix};
use simgroup::{addr, fixtures, Element, RandomParams, SimilarityLabel, Structure};

use common::{el, norm_oracle, split_randomly, structures};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn group_laws() -> Outcome {
    let params = RandomParams::default();
    for (name, st) in structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..1000 {
            let f = st.random_element(&mut rng, params);
            let g = st.random_element(&mut rng, params);
            let h = st.random_element(&mut rng, params);
            let assoc = st.compose(&st.compose(&f, &g), &h) == st.compose(&f, &st.compose(&g, &h));
            let inv =
                st.is_identity(&st.compose(&g, &st.inverse(&g))) && st.is_identity(&st.compose(&st.inverse(&g), &g));
            let unit = st.compose(&st.identity(), &g) == g && st.compose(&g, &st.identity()) == g;
            ensure(assoc && inv && unit, || format!("{name}: triple {i} breaks a group law"))?;
        }
    }
    Ok("1000 triples x 4 spaces".into())
}

fn normal_form() -> Outcome {
    let params = RandomParams::default();
    for (name, st) in structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for i in 0..500 {
            let g = st.random_element(&mut rng, params);
            let splits = rng.gen_range(1..8);
            let noisy = split_randomly(&st, &g, &mut rng, splits);
            ensure(st.reduce(&noisy) == st.reduce(&g), || format!("{name}: refinement {i} reduces differently"))?;
            ensure(st.reduce(&st.reduce(&noisy)) == st.reduce(&noisy), || format!("{name}: reduce not idempotent"))?;
        }
    }
    Ok("500 elements x 4 spaces".into())
}

fn cocycle_identity() -> Outcome {
    let params = RandomParams::default();
    for (name, st) in structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..500 {
            let g = st.random_element(&mut rng, params);
            let h = st.random_element(&mut rng, params);
            ensure(st.verify_cocycle_identity(&g, &h), || format!("{name}: pair {i} violates the cocycle identity"))?;
        }
    }
    Ok("500 pairs x 4 spaces".into())
}

fn norm_formula() -> Outcome {
    let st = Structure::canonical(fixtures::binary());
    let s = el(&st, &[("0", "1"), ("1", "0")]);
    let g0 = el(&st, &[("00", "0"), ("01", "10"), ("1", "11")]);
    let fixed = [(st.identity(), 0), (s, 0), (g0, 2)];
    for (g, want) in &fixed {
        ensure(st.cocycle_norm_sq(g) == *want && norm_oracle(&st, g) == *want, || {
            format!("fixture norm {} (oracle {}), want {want}", st.cocycle_norm_sq(g), norm_oracle(&st, g))
        })?;
    }
    let params = RandomParams::default();
    for (name, st) in structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for i in 0..200 {
            let g = st.random_element(&mut rng, params);
            let (n, o) = (st.cocycle_norm_sq(&g), norm_oracle(&st, &g));
            ensure(n == o, || format!("{name}: element {i} has norm {n}, oracle {o}"))?;
        }
    }
    Ok("fixtures 0/0/2; 200 elements x 4 spaces agree with oracle".into())
}

fn css_star_verdicts() -> Outcome {
    for (name, sp) in
        [("binary", fixtures::binary()), ("golden-mean", fixtures::golden_mean()), ("qaut", fixtures::qaut())]
    {
        let r = checks::verify_css_star(&sp);
        ensure(r.passed(), || format!("{name} should pass: {r:?}"))?;
    }
    let h = checks::verify_css_star(&fixtures::houghton_h2());
    ensure(h.condition1.is_some() && h.condition2.is_some(), || format!("houghton-H2 should fail both: {h:?}"))?;
    Ok("binary, golden-mean, qaut pass; houghton-H2 fails both".into())
}

fn sft_checks() -> Outcome {
    let golden = TransitionMatrix::parse(fixtures::GOLDEN_MEAN_MATRIX).map_err(|e| e.to_string())?;
    ensure(checks::is_irreducible(&golden), || "golden mean is not irreducible".into())?;
    ensure(checks::two_followed_symbols(&golden).len() == 1, || "golden mean needs one 2-followed symbol".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..200 {
        let n = rng.gen_range(2..=6);
        let m = checks::random_irreducible_matrix(&mut rng, n);
        ensure(common::irreducible_by_powers(&m), || format!("matrix {i} is not irreducible by powers"))?;
        ensure(!checks::two_followed_symbols(&m).is_empty(), || format!("matrix {i} has no 2-followed symbol"))?;
        let r = checks::verify_css_star(&checks::sft_from_matrix(&m));
        ensure(r.passed(), || format!("matrix {i} {:?} fails: {r:?}", m.rows()))?;
    }
    Ok("golden mean irreducible, one 2-followed symbol; 200 random matrices pass".into())
}

fn paradox() -> Outcome {
    let mut detail = Vec::new();
    for sp in [fixtures::binary(), fixtures::golden_mean()] {
        let name = sp.name().to_string();
        let st = Structure::canonical(sp);
        let data = st.paradox_data().map_err(|e| format!("{name}: {e}"))?;
        ensure(data.strata().len() == 6, || format!("{name}: {} strata", data.strata().len()))?;
        let r = st.verify_paradox(&data, 200, 7);
        ensure(r.passed() && r.coset_pairs == 50, || format!("{name}: {r:?}"))?;
        detail.push(format!("{name}: {} translate checks", r.translate_checks));
    }
    Ok(format!("6 strata x 200 samples, 0 violations ({})", detail.join(", ")))
}

fn pingpong() -> Outcome {
    let mut detail = Vec::new();
    for sp in [fixtures::binary(), fixtures::golden_mean()] {
        let name = sp.name().to_string();
        let st = Structure::canonical(sp);
        let pp = st.pingpong_pair(0).map_err(|e| format!("{name}: {e}"))?;
        let r = st.verify_pingpong(&pp, 8);
        ensure(r.passed(), || format!("{name}: {r:?}"))?;
        ensure(r.words_by_length[7] == 8748, || format!("{name}: {} words of length 8", r.words_by_length[7]))?;
        detail.push(format!("{name}: {} words", r.words_checked));
    }
    Ok(format!("all 8748 words of length 8 and every shorter word non-trivial ({})", detail.join(", ")))
}

fn icc() -> Outcome {
    let params = RandomParams::default();
    let check = |st: &Structure, f: &Element, what: &str| -> Result<(), String> {
        let conj = st.icc_conjugates(f, 25).map_err(|e| format!("{what}: {e}"))?;
        let distinct: HashSet<&Element> = conj.iter().collect();
        ensure(conj.len() == 25 && distinct.len() == 25, || format!("{what}: only {} distinct", distinct.len()))
    };
    for (name, st) in structures() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..20 {
            let f = st.random_nontrivial(&mut rng, params);
            check(&st, &f, &format!("{name} element {i}"))?;
        }
    }
    let q = Structure::canonical(fixtures::qaut());
    let t = q.transposition(&addr("1"), &addr("01"), SimilarityLabel::Canonical).map_err(|e| e.to_string())?;
    ensure(q.has_finite_support(&t) == Ok(true), || "qaut transposition should have finite support".into())?;
    check(&q, &t, "qaut finite-support transposition")?;
    Ok("25 distinct conjugates for 20 elements x 4 spaces and a finite-support element".into())
}

fn unbounded() -> Outcome {
    let st = Structure::canonical(fixtures::binary());
    let mut norms = Vec::new();
    for n in 1..=10 {
        let f = st.unbounded_sequence(&addr("0"), n).map_err(|e| e.to_string())?;
        norms.push(st.cocycle_norm_sq(&f));
    }
    let increasing = norms.windows(2).all(|w| w[0] < w[1]);
    let bounded_below = norms.iter().enumerate().all(|(i, &v)| v >= 2 * (i as u64 + 1));
    ensure(increasing && bounded_below, || format!("norms {norms:?}"))?;
    Ok(format!("norms {norms:?}"))
}

fn malnormal() -> Outcome {
    let st = Structure::canonical(fixtures::binary());
    let b = addr("0");
    let g = st.malnormal_witness(&b).map_err(|e| e.to_string())?;
    let r = st.malnormal_probe(&b, &g, 1000, 11).map_err(|e| e.to_string())?;
    ensure(r.counterexamples == 0, || format!("{r:?}"))?;
    Ok(format!("{} samples ({} non-trivial), 0 counterexamples", r.samples, r.nontrivial_samples))
}

fn probes() -> Outcome {
    for (name, st) in structures() {
        let r = st.centralizer_probe(&addr("0"), 300, 12).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.passed(), || format!("{name} centralizer: {r:?}"))?;
        let f = st.finite_support_probe(300, 12).map_err(|e| format!("{name}: {e}"))?;
        ensure(f.passed(), || format!("{name} finite support: {f:?}"))?;
        match name {
            "binary" => ensure(f.lambda_trivial, || "binary should report a trivial finitary subgroup".into())?,
            "qaut" => ensure(!f.lambda_trivial && f.n == 1, || format!("qaut reports n = {}", f.n))?,
            _ => {}
        }
    }
    Ok("300 samples x 4 spaces, 0 failures; binary trivial, qaut n = 1".into())
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("group-law fuzz", group_laws),
        ("normal-form soundness", normal_form),
        ("cocycle identity", cocycle_identity),
        ("norm formula oracle", norm_formula),
        ("CSS* verdicts", css_star_verdicts),
        ("SFT checks", sft_checks),
        ("paradoxical decomposition", paradox),
        ("ping-pong freeness", pingpong),
        ("ICC witness", icc),
        ("unbounded cocycle", unbounded),
        ("weak malnormality", malnormal),
        ("centralizer and finite-support probes", probes),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.2}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.2}s]: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
