#include <doctest.h>

#include <cmath>

#include "rht/assembly.hpp"

using namespace rht;

namespace {

Vec interpolate(const FineGrid& g, double (*f)(double, double)) {
  Vec v(g.n_nodes());
  for (int iy = 0; iy <= g.nx; ++iy)
    for (int ix = 0; ix <= g.nx; ++ix) v[g.node(ix, iy)] = f(g.node_x(ix), g.node_x(iy));
  return v;
}

double sinsin(double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); }

}  // namespace

TEST_CASE("reference element integrals") {
  // single element, h = 1: exact integrals of bilinear shape products
  FineGrid g{1, 1.0};
  SpMat M = assemble_mass(g);
  CHECK(M.rows() == 4);
  // diagonal 1/9, edge neighbors 1/18, diagonal neighbor 1/36
  CHECK(M.coeff(0, 0) == doctest::Approx(1.0 / 9));
  CHECK(M.coeff(0, 1) == doctest::Approx(1.0 / 18));
  CHECK(M.coeff(0, 2) == doctest::Approx(1.0 / 18));
  CHECK(M.coeff(0, 3) == doctest::Approx(1.0 / 36));

  ScalarField one = constant_field(g, 1.0);
  SpMat A = assemble_stiffness(g, one);
  CHECK(A.coeff(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(A.coeff(0, 1) == doctest::Approx(-1.0 / 6));
  CHECK(A.coeff(0, 3) == doctest::Approx(-1.0 / 3));
}

TEST_CASE("mass matrix partitions unity") {
  FineGrid g = build_fine_grid(13);
  SpMat M = assemble_mass(g);
  Vec ones = Vec::Ones(g.n_nodes());
  CHECK(ones.dot(M * ones) == doctest::Approx(1.0));  // |D| = 1
  SpMat Mt = SpMat(M.transpose());
  CHECK((Mt - M).norm() == 0.0);  // symmetric by construction
}

TEST_CASE("stiffness matrix") {
  FineGrid g = build_fine_grid(2);
  ScalarField one = constant_field(g, 1.0);
  SpMat A = assemble_stiffness(g, one);

  // constants in the kernel before boundary conditions
  Vec ones = Vec::Ones(g.n_nodes());
  CHECK((A * ones).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));

  // interior node diagonal = 4 elements x 2/3
  int center = g.node(1, 1);
  CHECK(A.coeff(center, center) == doctest::Approx(8.0 / 3));

  // linear in kappa
  ScalarField scaled = constant_field(g, 5.0);
  SpMat A5 = assemble_stiffness(g, scaled);
  CHECK((Mat(A5) - 5.0 * Mat(A)).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));

  ScalarField bad = constant_field(g, 0.0);
  CHECK_THROWS_AS(assemble_stiffness(g, bad), std::invalid_argument);
}

TEST_CASE("radiation matrix") {
  FineGrid g = build_fine_grid(3);
  ScalarField sig = constant_field(g, 1.0);
  SpMat M = assemble_mass(g);

  SUBCASE("zero state gives zero matrix") {
    SpMat N = assemble_radiation(g, sig, Vec::Zero(g.n_nodes()));
    CHECK(Mat(N).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("unit weight reproduces the mass matrix") {
    SpMat N = assemble_radiation(g, sig, Vec::Ones(g.n_nodes()));
    CHECK((Mat(N) - Mat(M)).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("constant weights scale: sigma=3, z=2 -> 24 M") {
    ScalarField s3 = constant_field(g, 3.0);
    SpMat N = assemble_radiation(g, s3, 2.0 * Vec::Ones(g.n_nodes()));
    CHECK((Mat(N) - 24.0 * Mat(M)).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("incremental radiation assembler matches the reference assembly") {
  FineGrid g = build_fine_grid(6);
  DirichletMap dofs = interior_map(g);
  ScalarField sig = constant_field(g, 2.0);
  for (int c = 0; c < g.n_cells(); ++c) sig.v[c] += 0.1 * (c % 5);

  RadiationAssembler rad(g, dofs, sig);
  Vec z = interpolate(g, sinsin);
  double wmin = rad.assemble(z);
  CHECK(wmin >= 0.0);

  SpMat ref = interior_map(g).reduce(assemble_radiation(g, sig, z));
  CHECK((Mat(rad.matrix()) - Mat(ref)).cwiseAbs().maxCoeff() <= 1e-15);

  // negative states report negative weights
  double wneg = rad.assemble(-z);
  CHECK(wneg < 0.0);
}

TEST_CASE("load vector quadrature") {
  FineGrid g = build_fine_grid(8);
  SpMat M = assemble_mass(g);

  SUBCASE("constant source equals the basis integrals") {
    Vec F = assemble_load(
        g, [](double, double, double) { return 1.0; }, 0.0);
    CHECK((F - phi_integrals(M)).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("zero source") {
    Vec F = assemble_load(
        g, [](double, double, double) { return 0.0; }, 0.0);
    CHECK(F.norm() == 0.0);
  }
  SUBCASE("separable source at t=0 is close to its nodal values times h^2") {
    FineGrid fine = build_fine_grid(50);
    auto f = [](double x, double y, double t) {
      return 3 * M_PI * M_PI * std::exp(M_PI * M_PI * t) * std::sin(M_PI * x) * std::sin(M_PI * y);
    };
    Vec F = assemble_load(fine, f, 0.0);
    double h2 = fine.h * fine.h;
    int id = fine.node(25, 25);  // domain center
    CHECK(F[id] == doctest::Approx(3 * M_PI * M_PI * h2).epsilon(0.02));
  }
}

TEST_CASE("noise load") {
  FineGrid g = build_fine_grid(5);
  Vec ints = phi_integrals(assemble_mass(g));
  CHECK(assemble_noise_load(ints, 0.0).norm() == 0.0);
  CHECK((assemble_noise_load(ints, 1.0) - ints).norm() == 0.0);
  CHECK((assemble_noise_load(ints, -2.5) + 2.5 * ints).norm() == 0.0);
}

TEST_CASE("Dirichlet reduction") {
  FineGrid g = build_fine_grid(2);
  DirichletMap dofs = interior_map(g);
  CHECK(dofs.n_interior() == 1);

  SpMat A = assemble_stiffness(g, constant_field(g, 1.0));
  SpMat A_ii = dofs.reduce(A);
  CHECK(A_ii.rows() == 1);
  CHECK(A_ii.coeff(0, 0) == doctest::Approx(8.0 / 3));

  FineGrid g2 = build_fine_grid(9);
  DirichletMap d2 = interior_map(g2);
  Vec v(g2.n_nodes());
  for (int i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * i);
  Vec round = d2.expand(d2.reduce(v));
  for (int i = 0; i < v.size(); ++i) {
    if (g2.is_boundary_node(i))
      CHECK(round[i] == 0.0);
    else
      CHECK(round[i] == v[i]);
  }

  // reduced stiffness stays SPD
  SpMat A2 = interior_map(g2).reduce(assemble_stiffness(g2, constant_field(g2, 1.0)));
  Eigen::SimplicialLLT<SpMat> llt(A2);
  CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("norms of the sine interpolant") {
  FineGrid g = build_fine_grid(64);
  SpMat M = assemble_mass(g);
  ScalarField one = constant_field(g, 1.0);
  SpMat A = assemble_stiffness(g, one);
  Vec v = interpolate(g, sinsin);

  CHECK(l2_norm(Vec::Zero(g.n_nodes()), M) == 0.0);
  // exact values: ||u||_L2 = 1/2, ||u||_a = pi/sqrt(2)
  CHECK(l2_norm(v, M) == doctest::Approx(0.5).epsilon(5e-3));
  CHECK(energy_norm(v, A) == doctest::Approx(M_PI / std::sqrt(2.0)).epsilon(5e-3));
}
