use mimetic_ll::analytic::{cell_errors, convergence_rate};
use mimetic_ll::experiments::{family_mesh, MeshFamily};
use mimetic_ll::linalg::SolverConfig;
use mimetic_ll::mesh::{build_uniform_quad_mesh, Mesh, Rect};
use mimetic_ll::mimetic::{
    discrete_divergence, local_gradient, GammaTildeRule, InnerProductConfig, LocalInnerProduct,
    MimeticOperators,
};
use mimetic_ll::solver::{torque_matrix, ll_rhs, LLSolver, MaterialParams, ThetaScheme};
use mimetic_ll::vec3;
use mimetic_ll::CellVectorField;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

/// Star-shaped polygon around the origin from sorted angles and radii.
fn star_polygon() -> impl Strategy<Value = Mesh> {
    (3usize..=10)
        .prop_flat_map(|k| (prop::collection::vec(0.0..2.0 * PI, k), prop::collection::vec(0.5..1.5f64, k)))
        .prop_filter_map("vertices too close", |(mut angles, radii)| {
            angles.sort_by(f64::total_cmp);
            let k = angles.len();
            let wrap = angles[0] + 2.0 * PI - angles[k - 1];
            if angles.windows(2).any(|w| w[1] - w[0] < 0.05) || wrap < 0.05 {
                return None;
            }
            let nodes = angles
                .iter()
                .zip(&radii)
                .map(|(a, r)| [r * a.cos(), r * a.sin()])
                .collect();
            Mesh::from_polygons(nodes, vec![(0..k).collect()]).ok()
        })
}

fn gamma_tilde() -> impl Strategy<Value = GammaTildeRule> {
    prop_oneof![
        Just(GammaTildeRule::InverseArea),
        (0.1..2.0f64).prop_map(GammaTildeRule::ScaledTrace)
    ]
}

fn unit_field(n: usize, seed: u64) -> CellVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CellVectorField(
        (0..n)
            .map(|_| {
                let z: f64 = rng.gen_range(-1.0..1.0);
                let phi: f64 = rng.gen_range(0.0..2.0 * PI);
                let s = (1.0 - z * z).sqrt();
                [s * phi.cos(), s * phi.sin(), z]
            })
            .collect(),
    )
}

fn small_mesh(family: MeshFamily, n: usize, seed: u64) -> Mesh {
    let mut mesh = family_mesh(family, n, 0.2, seed).unwrap();
    mesh.make_periodic(true, true).unwrap();
    mesh
}

fn periodic_family() -> impl Strategy<Value = MeshFamily> {
    prop_oneof![
        Just(MeshFamily::Uniform),
        Just(MeshFamily::Randomized),
        Just(MeshFamily::Smooth)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_matrices_reproduce_linear_fields(mesh in star_polygon(), rule in gamma_tilde()) {
        let cfg = InnerProductConfig { gamma_tilde: rule, ..Default::default() };
        let l = LocalInnerProduct::new(&mesh, 0, &cfg).unwrap();
        prop_assert!(rel_err(&(&l.m * &l.n), &l.r) < 1e-12);
        prop_assert!(rel_err(&(&l.m_inv * &l.r), &l.n) < 1e-12);
        let ntr = l.n.transpose() * &l.r;
        prop_assert!(rel_err(&ntr, &(DMatrix::identity(2, 2) * l.area)) < 1e-12);
        prop_assert!(l.m.clone().cholesky().is_some());
        prop_assert!(l.m_inv.clone().cholesky().is_some());
        prop_assert!(rel_err(&(&l.mass * &l.m_inv), &DMatrix::identity(l.num_faces(), l.num_faces())) < 1e-10);
    }

    #[test]
    fn gradient_of_linear_field_is_exact(mesh in star_polygon(), a in prop::array::uniform2(-2.0..2.0f64), b in -1.0..1.0f64) {
        let l = LocalInnerProduct::new(&mesh, 0, &InnerProductConfig::default()).unwrap();
        let cell = &mesh.cells[0];
        let lin = |x: [f64; 2]| [a[0] * x[0] + a[1] * x[1] + b, 0.0, 0.0];
        let faces: Vec<_> = cell.faces.iter().map(|&f| lin(mesh.faces[f].centroid)).collect();
        let g = local_gradient(&l, lin(cell.centroid), &faces);
        for (i, gi) in g.iter().enumerate() {
            let nrm = mesh.outward_normal(0, i);
            prop_assert!((gi[0] - (a[0] * nrm[0] + a[1] * nrm[1])).abs() < 1e-10);
        }
    }

    #[test]
    fn divergence_of_constant_flux_vanishes(mesh in star_polygon(), c in prop::array::uniform2(-1.0..1.0f64)) {
        let cell = &mesh.cells[0];
        let flux: Vec<f64> = (0..cell.num_faces())
            .map(|i| {
                let n = mesh.outward_normal(0, i);
                c[0] * n[0] + c[1] * n[1]
            })
            .collect();
        prop_assert!(discrete_divergence(&mesh, 0, &flux).abs() < 1e-12);
    }

    #[test]
    fn torque_matrix_matches_cross_products(
        m in prop::array::uniform3(-1.0..1.0f64),
        v in prop::array::uniform3(-1.0..1.0f64),
        alpha in 0.0..2.0f64,
        precession in any::<bool>(),
    ) {
        prop_assume!(vec3::norm(m) > 1e-3);
        let m = vec3::normalize(m);
        let a = torque_matrix(m, alpha, precession);
        let r = ll_rhs(m, v, alpha, precession);
        // for |m| = 1: -m x (m x v) = v - (m . v) m
        let damp = vec3::scale(vec3::axpy(v, -vec3::dot(m, v), m), alpha);
        let expected = if precession { vec3::sub(damp, vec3::cross(m, v)) } else { damp };
        for i in 0..3 {
            let av: f64 = (0..3).map(|j| a[i][j] * v[j]).sum();
            prop_assert!((av - r[i]).abs() < 1e-13);
            prop_assert!((r[i] - expected[i]).abs() < 1e-13);
        }
        prop_assert!(vec3::dot(m, r).abs() < 1e-13);
    }

    #[test]
    fn error_norms_are_a_metric(seed in any::<u64>()) {
        let mesh = family_mesh(MeshFamily::Randomized, 6, 0.2, seed).unwrap();
        let n = mesh.num_cells();
        let (a, b, c) = (unit_field(n, seed), unit_field(n, seed ^ 1), unit_field(n, seed ^ 2));
        let (aa_inf, aa_q) = cell_errors(&mesh, &a, &a);
        prop_assert_eq!(aa_inf, 0.0);
        prop_assert_eq!(aa_q, 0.0);
        let (ab_inf, ab_q) = cell_errors(&mesh, &a, &b);
        let (ba_inf, ba_q) = cell_errors(&mesh, &b, &a);
        prop_assert_eq!(ab_inf, ba_inf);
        prop_assert!((ab_q - ba_q).abs() < 1e-15);
        let (bc_inf, bc_q) = cell_errors(&mesh, &b, &c);
        let (ac_inf, ac_q) = cell_errors(&mesh, &a, &c);
        prop_assert!(ac_inf <= ab_inf + bc_inf + 1e-15);
        prop_assert!(ac_q <= ab_q + bc_q + 1e-15);
        // total area is one
        prop_assert!(ab_q <= ab_inf + 1e-15);
    }

    #[test]
    fn fitted_rate_recovers_power_law(p in 0.5..3.0f64, c in 1e-3..1e3f64) {
        let h: [f64; 4] = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
        let e: Vec<f64> = h.iter().map(|h| c * h.powf(p)).collect();
        prop_assert!((convergence_rate(&e, &h) - p).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn mesh_cells_close_and_tile(family in periodic_family(), n in 3usize..10, seed in any::<u64>()) {
        let mesh = family_mesh(family, n, 0.2, seed).unwrap();
        prop_assert!(mesh.validate().is_ok());
        prop_assert!((mesh.total_area() - 1.0).abs() < 1e-12);
        for (c, cell) in mesh.cells.iter().enumerate() {
            prop_assert!(cell.area > 0.0);
            let mut s = [0.0; 2];
            for i in 0..cell.num_faces() {
                let f = &mesh.faces[cell.faces[i]];
                let nrm = mesh.outward_normal(c, i);
                s[0] += f.length * nrm[0];
                s[1] += f.length * nrm[1];
            }
            prop_assert!(s[0].abs() < 1e-13 && s[1].abs() < 1e-13);
        }
        for f in &mesh.faces {
            prop_assert!(f.cells[0].is_some());
            prop_assert!(f.length > 0.0);
        }
    }

    #[test]
    fn global_duality_holds(family in periodic_family(), n in 3usize..8, seed in any::<u64>()) {
        let mesh = family_mesh(family, n, 0.2, seed).unwrap();
        let ops = MimeticOperators::new(&mesh, &InnerProductConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<f64> = (0..mesh.num_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..mesh.num_faces()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // single-valued face data, zero on the boundary
        let trace: Vec<f64> = (0..mesh.num_faces())
            .map(|f| if mesh.boundary[f].is_some() { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let (mut div_term, mut grad_term) = (0.0, 0.0);
        for (c, cell) in mesh.cells.iter().enumerate() {
            let l = &ops.locals[c];
            let k = cell.num_faces();
            let pc: Vec<f64> = (0..k).map(|i| p[cell.faces[i]] * cell.signs[i]).collect();
            div_term += cell.area * m[c] * discrete_divergence(&mesh, c, &pc);
            let faces: Vec<[f64; 3]> = cell.faces.iter().map(|&f| [trace[f], 0.0, 0.0]).collect();
            let g = local_gradient(l, [m[c], 0.0, 0.0], &faces);
            let gu = DVector::from_iterator(k, g.iter().map(|x| x[0]));
            grad_term += (gu.transpose() * &l.mass * DVector::from_vec(pc))[0];
        }
        prop_assert!((div_term + grad_term).abs() < 1e-11 * (1.0 + div_term.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn steps_keep_unit_length(family in periodic_family(), seed in any::<u64>(), implicit in any::<bool>()) {
        let mesh = small_mesh(family, 6, seed);
        let n = mesh.num_cells();
        let scheme = if implicit { ThetaScheme::implicit(1e-3) } else { ThetaScheme::explicit(1e-4) };
        let mut solver = LLSolver::new(mesh, &InnerProductConfig::default(), MaterialParams::default(), scheme, SolverConfig::default()).unwrap();
        let mut s = solver.initial_state(unit_field(n, seed), 0.0).unwrap();
        for _ in 0..3 {
            s = solver.step(&s).unwrap();
            prop_assert!(s.m.max_norm_defect() < 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn uniform_state_is_fixed(family in periodic_family(), seed in any::<u64>(), implicit in any::<bool>(), dir in prop::array::uniform3(-1.0..1.0f64)) {
        prop_assume!(vec3::norm(dir) > 1e-2);
        let mesh = small_mesh(family, 5, seed);
        let n = mesh.num_cells();
        let scheme = if implicit { ThetaScheme::implicit(1e-2) } else { ThetaScheme::explicit(1e-3) };
        let mut solver = LLSolver::new(mesh, &InnerProductConfig::default(), MaterialParams::default(), scheme, SolverConfig::default()).unwrap();
        let m0 = CellVectorField::uniform(n, vec3::normalize(dir));
        let mut s = solver.initial_state(m0.clone(), 0.0).unwrap();
        for _ in 0..3 {
            s = solver.step(&s).unwrap();
        }
        let (linf, _) = cell_errors(&solver.mesh, &s.m, &m0);
        prop_assert!(linf < 1e-12);
        prop_assert!(s.exchange_energy.abs() < 1e-20);
    }

    #[test]
    fn implicit_energy_decreases_on_squares(seed in any::<u64>(), alpha in 0.2..2.0f64) {
        // diagonal inverse inner product on squares, so every cell passes the M-matrix check
        let mut mesh = build_uniform_quad_mesh(6, 6, Rect::unit()).unwrap();
        mesh.make_periodic(true, true).unwrap();
        let n = mesh.num_cells();
        let ip = InnerProductConfig { gamma_tilde: GammaTildeRule::ScaledTrace(0.5), ..Default::default() };
        let params = MaterialParams { alpha, ..Default::default() };
        let mut solver = LLSolver::new(mesh, &ip, params, ThetaScheme::implicit(5e-3), SolverConfig::default()).unwrap();
        prop_assert_eq!(solver.ops.m_matrix_counts(), (n, n));
        let mut s = solver.initial_state(unit_field(n, seed), 0.0).unwrap();
        for _ in 0..5 {
            let next = solver.step(&s).unwrap();
            prop_assert!(next.exchange_energy <= s.exchange_energy * (1.0 + 1e-12));
            s = next;
        }
    }
}
