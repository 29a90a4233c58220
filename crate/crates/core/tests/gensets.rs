use polargrass::gensets::*;
use polargrass::linalg::{self, Subspace};
use polargrass::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model(d: &str) -> PolarModel {
    PolarModel::parse(d, Budget::DEFAULT).unwrap()
}

fn generates(g: &GenSet, m: &mut PolarModel, k: usize) -> bool {
    let geom = build_grassmannian(m, k).unwrap();
    is_generating(&geom, &g.ids(&geom).unwrap()).unwrap()
}

fn unit(n: usize, i: usize) -> Vec<Elem> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

#[test]
fn apartments_have_two_to_the_n_cliques() {
    for d in ["H(2,1,2)", "H(3,1,2)", "Qplus(3,2)", "Qparab(3,3)"] {
        let m = model(d);
        let a = apartment(&m).unwrap();
        let n = m.rank();
        assert_eq!(a.len(), 1 << n, "{d}");
        for s in &a.elements {
            assert_eq!(s.rank(), n);
            assert!(m.is_totally_singular(s));
        }
    }
}

#[test]
fn hermitian_apartment_generates_but_hyperbolic_does_not() {
    let mut m = model("H(2,1,2)");
    let a = apartment(&m).unwrap();
    assert!(generates(&a, &mut m, 2));

    let mut m = model("Qplus(3,2)");
    let a = apartment(&m).unwrap();
    let geom = build_grassmannian(&mut m, 3).unwrap();
    let r = span_closure(&geom, &a.ids(&geom).unwrap()).unwrap();
    assert_eq!(r.size(), a.len());
}

#[test]
fn random_triples_span_the_line_grassmannian() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in ["Qparab(3,2)", "Qplus(4,2)"] {
        let mut m = model(d);
        let geom = build_grassmannian(&mut m, 2).unwrap();
        for _ in 0..5 {
            let (h, p0, l0) = random_triple(&mut m, &mut rng).unwrap();
            let g = genset_k2(&mut m, &h, &p0, &l0).unwrap();
            assert!(is_generating(&geom, &g.ids(&geom).unwrap()).unwrap(), "{d}");
            assert_eq!(g.tag_counts()["hat-Z"], 1);
        }
    }
}

#[test]
fn genset_k2_rejects_bad_lines() {
    let mut m = model("Qparab(3,2)");
    let f = m.field().clone();
    let h = m.section_hyperplane(&unit(7, 6)).unwrap();
    let p0 = unit(7, 0);
    let h = m.section_hyperplane(&unit(7, 1)).unwrap_or(h);
    // ⟨e1, e3⟩ lies in p0^⊥ for p0 = e1.
    let l0 = Subspace::from_rows(&f, 7, &[unit(7, 0), unit(7, 2)]).unwrap();
    let err = genset_k2(&mut m, &h, &p0, &l0).unwrap_err();
    assert!(matches!(err, GensetError::Hypothesis(_)), "{err}");
    assert!(err.to_string().contains("p0^⊥") || err.to_string().contains("H"));
    let small = &mut model("Qparab(2,2)");
    let h2 = small.section_hyperplane(&unit(5, 1)).unwrap();
    let l = Subspace::from_rows(&f, 5, &[unit(5, 0), unit(5, 2)]).unwrap();
    assert!(genset_k2(small, &h2, &unit(5, 0), &l).is_err());
}

#[test]
fn genset_k_at_k2_matches_genset_k2() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut m = model("Qparab(3,2)");
    let (h, p0, _) = random_triple(&mut m, &mut rng).unwrap();
    let g = genset_k(&mut m, &h, &p0, 2, None).unwrap();
    let hat = g.elements[g.tags.iter().position(|t| t == "hat-Z").unwrap()].clone();
    let g2 = genset_k2(&mut m, &h, &p0, &hat).unwrap();
    let mut a = g.elements.clone();
    let mut b = g2.elements.clone();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn genset_k_spans_planes_of_qplus_4_2() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut m = model("Qplus(4,2)");
    let geom = build_grassmannian(&mut m, 3).unwrap();
    for _ in 0..2 {
        let (h, p0, _) = random_triple(&mut m, &mut rng).unwrap();
        let g = genset_k(&mut m, &h, &p0, 3, None).unwrap();
        assert!(is_generating(&geom, &g.ids(&geom).unwrap()).unwrap());
    }
}

#[test]
fn singular_hyperplane_variant() {
    let mut m = model("Qplus(4,2)");
    let q = 0u32;
    let p0 = (1..m.num_points() as u32).find(|&p| !m.collinear(0, p as usize)).unwrap();
    let g = genset_singular(&mut m, q, p0, 2, None).unwrap();
    assert!(generates(&g, &mut m, 2));
    for tag in ["S_k(q)", "S_k({q,p0}^⊥)", "S_k(p0)", "hat-Z"] {
        assert!(g.tag_counts().contains_key(tag), "{tag}");
    }

    let mut m = model("Qparab(3,2)");
    let p0 = (1..m.num_points() as u32).find(|&p| !m.collinear(0, p as usize)).unwrap();
    let err = genset_singular(&mut m, 0, p0, 2, None).unwrap_err();
    assert!(err.to_string().contains("no lines"), "{err}");
}

#[test]
fn hermitian_points_and_lines() {
    let g = hermitian_genset(3, 2, 1, 1, Budget::DEFAULT).unwrap();
    assert_eq!(g.len(), 5);
    assert!(generates(&g, &mut model("H(2,1,3)"), 1));

    let g = hermitian_genset(2, 3, 1, 2, Budget::DEFAULT).unwrap();
    assert_eq!(g.len(), 21);
    assert!(g.notes.iter().any(|n| n.contains("F4")));
    assert!(hermitian_genset(2, 2, 1, 2, Budget::DEFAULT).is_err());
}

#[test]
fn orthogonal_line_sets() {
    let g = orth_q2_genset(4, 3, 1, Budget::DEFAULT).unwrap();
    assert_eq!(g.len(), 21);
    assert!(g.is_rational(&Field::with_order(4).unwrap().subfield(1).unwrap()));
    assert!(generates(&g, &mut model("Qparab(3,4)"), 2));
    assert!(matches!(orth_q2_genset(4, 3, 0, Budget::DEFAULT), Err(GensetError::Unsupported(_))));
    assert!(matches!(orth_q2_genset(5, 3, 1, Budget::DEFAULT), Err(GensetError::Unsupported(_))));
}

#[test]
fn orthogonal_elliptic_case_has_28_lines() {
    let g = orth_q2_genset(4, 3, 2, Budget::DEFAULT).unwrap();
    assert_eq!(g.len(), 28);
    for s in &g.elements {
        assert_eq!(s.rank(), 2);
    }
}

#[test]
fn adjoined_line_matches_the_fixture_coordinates() {
    let m = model("Qparab(3,4)");
    let f = m.field().clone();
    let l0 = Subspace::from_rows(&f, 7, &[unit(7, 0), unit(7, 4)]).unwrap();
    let l1 = Subspace::from_rows(&f, 7, &[unit(7, 1), unit(7, 5)]).unwrap();
    let t = cor54_adjoin(&m, 1, &l0, &l1).unwrap();
    let e = f.eps();
    let expected = Subspace::from_rows(&f, 7, &[vec![1, 0, 0, 0, e, 0, 0], vec![0, e, 0, 0, 0, f.neg(1), 0]]).unwrap();
    assert_eq!(t, expected);
    // [1,0,0,0,1,0,0] precedes it on ℓ0 but is rational.
    assert!(!t.contains_vector(&f, &[1, 0, 0, 0, 1, 0, 0]));
    let not_opposite = Subspace::from_rows(&f, 7, &[unit(7, 2), unit(7, 5)]).unwrap();
    assert!(cor54_adjoin(&m, 1, &l0, &not_opposite).is_err());
}

#[test]
fn rational_lines_and_the_adjoined_line_generate_q2_6_4() {
    let mut m = model("Qparab(3,4)");
    let geom = build_grassmannian(&mut m, 2).unwrap();
    let ctx = SubfieldContext::new(&geom, 1).unwrap();
    assert_eq!(ctx.rational.count(), 315);
    let rational = ctx.rational_ids();
    // Q2(6,4) is generated over F2 by its rational lines alone.
    let r = span_closure(&geom, &rational).unwrap();
    assert!(r.generated_all);

    let f = m.field().clone();
    let l0 = Subspace::from_rows(&f, 7, &[unit(7, 0), unit(7, 4)]).unwrap();
    let l1 = Subspace::from_rows(&f, 7, &[unit(7, 1), unit(7, 5)]).unwrap();
    let t = cor54_adjoin(&m, 1, &l0, &l1).unwrap();
    let mut seed = rational.clone();
    seed.push(geom.id_of(&t).unwrap());
    assert!(is_generating(&geom, &seed).unwrap());

    let v = gset_predicate(&geom, &m, &ctx, &rational).unwrap();
    assert!(v.generates_f0 && v.holds);
    let v = gset_predicate(&geom, &m, &ctx, &rational[..3]).unwrap();
    assert!(!v.generates_f0 && !v.holds);
}

#[test]
fn rational_planes_lie_in_the_closure() {
    let mut m = model("Qparab(3,4)");
    let geom = build_grassmannian(&mut m, 2).unwrap();
    let ctx = SubfieldContext::new(&geom, 1).unwrap();
    let r = span_closure(&geom, &ctx.rational_ids()).unwrap();
    m.ensure_level(3).unwrap();
    let f = m.field().clone();
    let planes = m.level(3).unwrap();
    let local_lines = linalg::all_subspaces(&f, 3, 2);
    let mut checked = 0;
    for pid in (0..planes.len()).step_by(7) {
        let plane = planes.subspace(pid);
        let rational = plane.points(&f).iter().filter(|p| p.iter().all(|&x| ctx.sub.contains(x))).count();
        if rational < 2 {
            continue;
        }
        checked += 1;
        for l in &local_lines {
            let id = geom.id_of(&l.map_from_local(&f, &plane.row_vecs())).unwrap();
            assert!(r.closed.contains(id as usize));
        }
    }
    assert!(checked > 10);
}

#[test]
fn hyperbolic_rational_lines_do_not_generate() {
    let mut m = model("Qplus(3,4)");
    let geom = build_grassmannian(&mut m, 2).unwrap();
    let ctx = SubfieldContext::new(&geom, 1).unwrap();
    let v = gset_predicate(&geom, &m, &ctx, &ctx.rational_ids()).unwrap();
    assert!(v.generates_f0);
    assert!(!v.holds);

    // The closure is proper, yet it holds every line through a rational point.
    let r = span_closure(&geom, &ctx.rational_ids()).unwrap();
    assert!(!r.generated_all);
    // Every line through a rational point is in the closure of the rational lines.
    let sub = &ctx.sub;
    for id in 0..geom.num_points() as u32 {
        let has_rational = geom.point(id).points(m.field()).iter().any(|p| p.iter().all(|&x| sub.contains(x)));
        if has_rational {
            assert!(r.closed.contains(id as usize));
        }
    }
}

#[test]
fn omega_obstruction_q4() {
    let r = omega_obstruction(4, Budget::DEFAULT).unwrap();
    assert_eq!((r.lines, r.grassmann_lines), (1785, 3570));
    assert!(r.confirmed());
    assert_eq!(r.planes_through_witness.len(), 2);
    assert!(omega_obstruction(2, Budget::DEFAULT).is_err());
}

#[test]
fn fixtures_verify() {
    for name in FIXTURE_NAMES {
        let b = load_fixture(name).unwrap();
        let r = verify_fixture(&b).unwrap();
        assert!(r.all_pass(), "{name}: {:?}", r.failures());
    }
    assert!(load_fixture("nope").is_err());
}

#[test]
fn fixture_failures_name_the_identity() {
    let mut b = load_fixture("t-gen-4").unwrap();
    b.subspaces[1].rows[0][1] = "1".into();
    let r = verify_fixture(&b).unwrap();
    assert!(!r.all_pass());
    assert!(r.failures().iter().any(|x| x.identity.contains("l1")));

    let mut b = load_fixture("t-gen-4").unwrap();
    b.instances[0].modulus = vec![1, 0, 1];
    assert!(verify_fixture(&b).is_err());
}

#[test]
fn nondegenerate_hyperplanes_of_h_2_1_2_have_full_rank() {
    let m = model("H(2,1,2)");
    let mut nondegenerate = 0;
    for a in linalg::normalized_vectors(m.field(), 5) {
        let h = m.section_hyperplane(&a).unwrap();
        if let Some(inv) = h.induced {
            nondegenerate += 1;
            assert_eq!(inv.n, 2);
        }
    }
    assert!(nondegenerate > 0);
}
