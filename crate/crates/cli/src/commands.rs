use std::io::Read;

use cyclovan::certifier::{self, Certificate, CertificateVerdict, RemarkCase};
use cyclovan::cyclo_units::{self, Verdict};
use cyclovan::ff_arith::{build_field, CyclotomicSetup, FieldContext};
use cyclovan::periods::{compute_period_table_with, ScanMode};
use cyclovan::{nt, quadforms, Error, Result};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::report::{Check, ErrorInfo, Outcome, RunReport};
use crate::{Command, FieldArgs};

const EXHAUSTIVE_GUARD: u64 = 2_000_000;

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Setup(_) => "setup",
        Command::Periods { .. } => "periods",
        Command::Indices { .. } => "indices",
        Command::Identity(_) => "identity",
        Command::Certify { .. } => "certify",
        Command::Vandiver { .. } => "vandiver",
        Command::Classnum { .. } => "classnum",
        Command::Cornacchia { .. } => "cornacchia",
        Command::Stickelberger { .. } => "stickelberger",
        Command::Density { .. } => "density",
        Command::Explore { .. } => "explore",
        Command::Verify { .. } => "verify",
    }
}

pub fn run(cmd: &Command) -> (RunReport, Outcome) {
    let mut report = RunReport::new(name(cmd));
    let outcome = match dispatch(cmd, &mut report) {
        Ok(outcome) => outcome,
        Err(err) => {
            let outcome = Outcome::of_error(&err);
            report.summary = format!("{}: {err}", report.command);
            report.error = Some(ErrorInfo { kind: outcome.label(), message: err.to_string() });
            outcome
        }
    };
    let outcome = match outcome {
        Outcome::Success | Outcome::Inconclusive if !report.all_ok() => Outcome::Internal,
        other => other,
    };
    (report, outcome)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result serializes")
}

fn dispatch(cmd: &Command, rep: &mut RunReport) -> Result<Outcome> {
    match cmd {
        Command::Setup(args) => setup(args, rep),
        Command::Periods { field, full } => periods(field, *full, rep),
        Command::Indices { field, r } => indices(field, *r, rep),
        Command::Identity(args) => identity(args, rep),
        Command::Certify { p, g, search } => {
            rep.param("p", p).param("max_q", search.max_q).param("max_witnesses", search.max_witnesses);
            rep.param("field_cap", search.field_cap);
            quadforms::class_number(*p)?;
            let g = match g {
                Some(g) => *g,
                None => nt::least_primitive_root(*p)?,
            };
            rep.param("g", g);
            let cert = certifier::certify_half_plus_with_root(*p, g, search.max_witnesses, search.max_q, search.field_cap)?;
            certificate_checks(&cert, rep);
            rep.summary = format!(
                "certify p={p}: {:?} after {} witness(es) {:?}",
                cert.verdict,
                cert.witnesses.len(),
                cert.witnesses.iter().map(|w| w.q()).collect::<Vec<_>>()
            );
            rep.result = to_value(&cert);
            Ok(verdict_outcome(cert.verdict))
        }
        Command::Vandiver { p, search } => {
            rep.param("p", p).param("max_q", search.max_q).param("max_witnesses", search.max_witnesses);
            rep.param("field_cap", search.field_cap);
            let scan = certifier::vandiver_scan(*p, search.max_witnesses, search.max_q, search.field_cap)?;
            rep.param("g", scan.g);
            for (r, entry) in &scan.entries {
                let consistent = entry
                    .attempts
                    .iter()
                    .all(|a| a.i_mod_p == 0 || nt::pow_mod(a.q, r - 1, *p) == 1);
                rep.check(Check::new(format!("r={r}: nonzero indices only where q^(r-1) = 1 mod p"), consistent));
            }
            let open: Vec<u64> = scan.entries.iter().filter(|(_, e)| e.verdict == Verdict::Unknown).map(|(r, _)| *r).collect();
            rep.summary = format!("vandiver p={p}: {} of {} even r certified; open {open:?}", scan.entries.len() - open.len(), scan.entries.len());
            rep.result = to_value(&scan);
            Ok(if open.is_empty() { Outcome::Success } else { Outcome::Inconclusive })
        }
        Command::Classnum { p } => {
            rep.param("p", p);
            let cn = quadforms::class_number(*p)?;
            let forms = quadforms::reduced_forms_count(-(*p as i64))?;
            rep.check(Check::new("h = number of reduced forms of discriminant -p", cn.h == forms).detail(format!("{} vs {forms}", cn.h)));
            rep.check(Check::new("V + R = (p-1)/2", cn.v + cn.r == (p - 1) / 2));
            rep.check(Check::new("h odd", cn.h % 2 == 1));
            rep.summary = format!("classnum p={p}: R={}, V={}, h={}", cn.r, cn.v, cn.h);
            rep.result = json!({ "class_number": cn, "reduced_forms": forms });
            Ok(Outcome::Success)
        }
        Command::Cornacchia { d, n } => {
            rep.param("D", d).param("N", n);
            if !nt::is_prime(*n) || *d == 0 {
                return Err(Error::InvalidInput(format!("need D >= 1 and prime N, got D={d}, N={n}")));
            }
            let sol = quadforms::cornacchia(*d, *n);
            if let Some((x, y)) = sol {
                let ok = x as u128 * x as u128 + *d as u128 * y as u128 * y as u128 == *n as u128;
                rep.check(Check::new("x^2 + D y^2 = N", ok));
            }
            match quadforms::represent_all(*d, &BigInt::from(*n), EXHAUSTIVE_GUARD) {
                Ok(all) => {
                    let any = all.iter().any(|(_, y)| *y > BigInt::from(0)) || (*n == *d);
                    rep.check(Check::new("exhaustive search agrees on solvability", any == sol.is_some()));
                }
                Err(_) => rep.check(Check::new("exhaustive search skipped (too large)", true)),
            }
            rep.summary = match sol {
                Some((x, y)) => format!("cornacchia: {n} = {x}^2 + {d}*{y}^2"),
                None => format!("cornacchia: {n} is not of the form x^2 + {d}y^2"),
            };
            rep.result = json!({ "solution": sol.map(|(x, y)| json!({ "x": x.to_string(), "y": y.to_string() })) });
            Ok(Outcome::Success)
        }
        Command::Stickelberger { p, q } => stickelberger(*p, *q, rep),
        Command::Density { d, bound } => {
            rep.param("D", d).param("bound", bound);
            let est = quadforms::density_estimate(*d, *bound)?;
            rep.check(Check::new("represented <= primes", est.represented <= est.primes));
            rep.summary = format!("density D={d}: {}/{} = {:.6}", est.represented, est.primes, est.ratio);
            rep.result = json!({
                "D": est.d,
                "bound": est.bound,
                "represented": est.represented,
                "primes": est.primes,
                "fraction": format!("{}/{}", est.represented, est.primes),
                "ratio": est.ratio,
            });
            Ok(Outcome::Success)
        }
        Command::Explore { p, which, max_q, field_cap } => {
            rep.param("p", p).param("case", which).param("max_q", max_q).param("field_cap", field_cap);
            let case: RemarkCase = which.parse()?;
            let data = certifier::remark_explore(*p, case, *max_q, *field_cap)?;
            rep.check(Check::new("quadratic identity residual = 0", data.identity.residual == BigInt::from(0)));
            rep.check(Check::new("l=1 congruence residual = 0", data.congruence_residual == 0));
            rep.summary = format!(
                "explore p={p} {which}: q={}, v={}, index i_{}={} ({:?})",
                data.q, data.v, data.index.r, data.index.i_mod_p, data.index.verdict
            );
            rep.result = to_value(&data);
            Ok(Outcome::Success)
        }
        Command::Verify { input } => verify(input, rep),
    }
}

fn verdict_outcome(v: CertificateVerdict) -> Outcome {
    match v {
        CertificateVerdict::Trivial => Outcome::Success,
        CertificateVerdict::Inconclusive => Outcome::Inconclusive,
    }
}

fn certificate_checks(cert: &Certificate, rep: &mut RunReport) {
    let outcome = certifier::verify_certificate(cert);
    let check = Check::new("certificate re-verifies", outcome.ok);
    rep.check(if outcome.ok { check } else { check.detail(outcome.diagnostics.join("; ")) });
}

fn field_setup(args: &FieldArgs, rep: &mut RunReport) -> Result<(CyclotomicSetup, FieldContext)> {
    rep.param("p", args.p).param("q", args.q).param("field_cap", args.field_cap);
    let setup = match args.g {
        Some(g) => CyclotomicSetup::with_primitive_root(args.p, args.q, g)?,
        None => CyclotomicSetup::new(args.p, args.q)?,
    };
    rep.param("g", setup.g);
    let ctx = build_field(&setup, args.field_cap)?;
    Ok((setup, ctx))
}

fn setup(args: &FieldArgs, rep: &mut RunReport) -> Result<Outcome> {
    let (setup, ctx) = field_setup(args, rep)?;
    rep.check(Check::new("setup invariants", setup.check().is_ok()));
    rep.check(Check::new("field invariants", ctx.check().is_ok()));
    rep.check(Check::new("zeta has order p", ctx.dlog_order_p(&ctx.zeta) == Ok(1)));
    rep.summary = format!(
        "setup p={} q={}: n={}, e={}, field size {}, modulus {:?}",
        setup.p, setup.q, setup.n, setup.e, setup.field_size(), ctx.modulus
    );
    rep.result = json!({ "setup": setup, "field": ctx });
    Ok(Outcome::Success)
}

fn periods(args: &FieldArgs, full: bool, rep: &mut RunReport) -> Result<Outcome> {
    let (setup, ctx) = field_setup(args, rep)?;
    rep.param("full", full);
    let table = compute_period_table_with(&ctx, &setup, ScanMode::Parallel)?;
    for (name, ok) in table.invariant_checks() {
        rep.check(Check::new(name, ok));
    }
    let mut value = to_value(&table);
    if let Value::Object(map) = &mut value {
        if !full {
            map.remove("eta");
        }
        map.insert("a_mod_p".into(), to_value(&table.a_mod_p()));
    }
    rep.summary = format!(
        "periods p={} q={}: v={}, d={:?}",
        setup.p,
        setup.q,
        table.v,
        table.d.iter().map(ToString::to_string).collect::<Vec<_>>()
    );
    rep.result = value;
    Ok(Outcome::Success)
}

fn indices(args: &FieldArgs, r: Option<u64>, rep: &mut RunReport) -> Result<Outcome> {
    let (setup, ctx) = field_setup(args, rep)?;
    let rs: Vec<u64> = match r {
        Some(r) => vec![r],
        None => (2..=setup.p.saturating_sub(3)).step_by(2).collect(),
    };
    rep.param("r", &rs);
    rep.check(Check::new("zeta has order p", ctx.dlog_order_p(&ctx.zeta) == Ok(1)));
    let records = rs
        .iter()
        .map(|&r| cyclo_units::beta_index_mod_p(&ctx, &setup, r))
        .collect::<Result<Vec<_>>>()?;
    for rec in &records {
        let consistent = rec.i_mod_p == 0 || nt::pow_mod(setup.q, rec.r - 1, setup.p) == 1;
        rep.check(Check::new(format!("r={}: i (q^(r-1) - 1) = 0 mod p", rec.r), consistent));
    }
    let unknown = records.iter().any(|rec| rec.verdict == Verdict::Unknown);
    rep.summary = records
        .iter()
        .map(|rec| format!("i_{}={} ({:?})", rec.r, rec.i_mod_p, rec.verdict))
        .collect::<Vec<_>>()
        .join(", ");
    rep.result = json!({ "records": records });
    Ok(if unknown { Outcome::Inconclusive } else { Outcome::Success })
}

fn identity(args: &FieldArgs, rep: &mut RunReport) -> Result<Outcome> {
    let (setup, ctx) = field_setup(args, rep)?;
    let table = compute_period_table_with(&ctx, &setup, ScanMode::Parallel)?;
    let terms = cyclo_units::identity_terms(setup.p, setup.q, setup.n, table.v, &table.d)?;
    let idx = cyclo_units::congruence_indices(&ctx, &setup)?;
    let cong = cyclo_units::verify_congruences_ii(&setup, &table.a, &idx)?;
    rep.check(Check::new("quadratic identity residual = 0", terms.residual == BigInt::from(0)));
    rep.check(Check::new("a_0 = -1 mod p", cong.a0_residual == 0));
    for (l, res) in &cong.residuals {
        rep.check(Check::new(format!("congruence l={l}"), *res == 0).detail(format!("residual {res}")));
    }
    rep.summary = format!("identity p={} q={}: residual {}, congruences hold: {}", setup.p, setup.q, terms.residual, cong.holds());
    rep.result = json!({
        "v": table.v,
        "d": table.d.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "identity": terms,
        "indices": idx,
        "congruences": cong,
    });
    Ok(Outcome::Success)
}

fn stickelberger(p: u64, q: u64, rep: &mut RunReport) -> Result<Outcome> {
    rep.param("p", p).param("q", q);
    let cn = quadforms::class_number(p)?;
    if !nt::is_prime(q) || q == p || nt::kronecker(-(p as i64), q) != 1 {
        return Err(Error::InvalidInput(format!("q={q} must be a prime with (-{p}/q) = 1")));
    }
    let h = cn.h as u32;
    let sols = quadforms::represent_four_prime_power(p, q, h)?;
    let target = BigInt::from(q).pow(h) * 4;
    if let Ok(all) = quadforms::represent_all(p, &target, EXHAUSTIVE_GUARD) {
        rep.check(Check::new("exhaustive search finds the same solutions", all == sols));
    }
    let (pb, qb) = (BigInt::from(p), BigInt::from(q));
    let zero = BigInt::from(0);
    let mut rows = Vec::new();
    let mut primitive = 0;
    let mut congruent = 0;
    for (c, d) in &sols {
        let out = quadforms::stickelberger_check(p, q, cn.r, c, d, h)?;
        let is_primitive = c % &qb != zero && c % &pb != zero;
        if is_primitive {
            primitive += 1;
            congruent += out.holds as usize;
        }
        rows.push(json!({
            "C": c.to_string(),
            "D": d.to_string(),
            "primitive": is_primitive,
            "holds": out.holds,
            "sign": out.sign,
        }));
    }
    rep.check(Check::new("exactly one solution up to sign with q, p not dividing C", primitive == 1).detail(format!("{primitive} found")));
    rep.check(Check::new("C = 2 (-q)^(-R) mod p up to sign", primitive == 1 && congruent == 1));
    rep.summary = format!("stickelberger p={p} q={q}: h={}, R={}, solutions {}", cn.h, cn.r, rows.len());
    rep.result = json!({ "h": cn.h, "R": cn.r, "N": target.to_string(), "solutions": rows });
    Ok(Outcome::Success)
}

fn verify(input: &str, rep: &mut RunReport) -> Result<Outcome> {
    rep.param("input", input);
    let mut text = String::new();
    let read = if input == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(input).map(|t| text = t)
    };
    read.map_err(|e| Error::InvalidInput(format!("cannot read {input}: {e}")))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("not JSON: {e}")))?;
    // accept a bare certificate or a certify report
    let body = match value.get("result") {
        Some(result) if value.get("command").is_some() => result.clone(),
        _ => value,
    };
    let cert: Certificate =
        serde_json::from_value(body).map_err(|e| Error::InvalidInput(format!("not a certificate: {e}")))?;
    let outcome = certifier::verify_certificate(&cert);
    rep.check(Check::new("certificate re-verifies", outcome.ok));
    rep.summary = if outcome.ok {
        format!("verify p={}: valid, verdict {:?}", cert.p, cert.verdict)
    } else {
        format!("verify p={}: INVALID: {}", cert.p, outcome.diagnostics.join("; "))
    };
    rep.result = to_value(&outcome);
    Ok(if outcome.ok { verdict_outcome(cert.verdict) } else { Outcome::InvalidInput })
}
