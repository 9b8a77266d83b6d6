// Open-system engine checked against structurally independent routes: a
// basis-column construction of the superoperator, Runge-Kutta integration,
// and textbook closed forms.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <qsnn/lindblad.hpp>
#include <qsnn/ode_oracle.hpp>

using namespace qsnn;

namespace {

std::mt19937_64 rng_for(const char* tag) {
  std::seed_seq seq(tag, tag + std::char_traits<char>::length(tag));
  return std::mt19937_64(seq);
}

CMatrix random_complex(Index n, std::mt19937_64& g, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = Complex(u(g), u(g));
  return m;
}

CMatrix random_hermitian(Index n, std::mt19937_64& g, double scale = 1.0) {
  const CMatrix a = random_complex(n, g, scale);
  return 0.5 * (a + a.adjoint());
}

DensityMatrix random_density(Index n, std::mt19937_64& g) {
  const CMatrix a = random_complex(n, g);
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace();
  return DensityMatrix::validated(std::move(rho));
}

GeneratorSpec random_generator(Index n, std::mt19937_64& g, int n_lindblads) {
  std::vector<CMatrix> ls;
  for (int k = 0; k < n_lindblads; ++k) ls.push_back(random_complex(n, g));
  return GeneratorSpec::validated(random_hermitian(n, g), std::move(ls));
}

// The master-equation right-hand side applied directly to a matrix.
CMatrix direct_rhs(const GeneratorSpec& spec, const CMatrix& rho) {
  const Complex i_unit(0.0, 1.0);
  CMatrix out = -i_unit * (spec.hamiltonian * rho - rho * spec.hamiltonian);
  for (const auto& l : spec.lindblads) {
    const CMatrix ldl = l.adjoint() * l;
    out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
  }
  return out;
}

// Oracle: build the superoperator column by column by applying the
// right-hand side to every matrix unit, bypassing all Kronecker identities.
CMatrix liouvillian_oracle(const GeneratorSpec& spec) {
  const Index d = spec.dim();
  CMatrix m(d * d, d * d);
  for (Index b = 0; b < d; ++b)
    for (Index a = 0; a < d; ++a) {
      CMatrix unit = CMatrix::Zero(d, d);
      unit(a, b) = 1.0;
      const CMatrix image = direct_rhs(spec, unit);
      m.col(b * d + a) = Eigen::Map<const CVector>(image.data(), d * d);
    }
  return m;
}

}  // namespace

TEST_CASE("build_liouvillian matches the basis-column oracle") {
  auto g = rng_for("liouvillian-oracle");
  for (int trial = 0; trial < 10; ++trial) {
    std::uniform_int_distribution<Index> dim(2, 5);
    std::uniform_int_distribution<int> nl(0, 3);
    const auto spec = random_generator(dim(g), g, nl(g));
    const auto l = build_liouvillian(spec);
    const CMatrix want = liouvillian_oracle(spec);
    REQUIRE((l.matrix - want).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("the identity is a left null vector of the generator") {
  auto g = rng_for("trace-null");
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = random_generator(4, g, 2);
    const auto l = build_liouvillian(spec);
    const CVector id_vec = vec(CMatrix(CMatrix::Identity(4, 4)));
    REQUIRE((id_vec.adjoint() * l.matrix).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("propagation preserves density-matrix invariants") {
  auto g = rng_for("cptp");
  std::uniform_real_distribution<double> ut(0.0, 5.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::uniform_int_distribution<Index> dim(2, 6);
    const Index n = dim(g);
    const auto spec = random_generator(n, g, 2);
    const auto p = propagator(build_liouvillian(spec), ut(g));
    const auto rho = evolve(random_density(n, g), p);  // validated() re-checks
    REQUIRE(std::abs(rho.matrix.trace() - Complex(1.0, 0.0)) < 1e-10);
    REQUIRE(hermiticity_error(rho.matrix) < 1e-10);
  }
}

TEST_CASE("propagator at t = 0 is the identity map") {
  auto g = rng_for("prop-zero");
  const auto spec = random_generator(3, g, 2);
  const auto p = propagator(build_liouvillian(spec), 0.0);
  REQUIRE((p.matrix - CMatrix::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("propagators compose: t1 + t2 equals t2 after t1") {
  auto g = rng_for("prop-compose");
  const auto spec = random_generator(3, g, 2);
  const auto l = build_liouvillian(spec);
  const CMatrix lhs = propagator(l, 0.7 + 1.9).matrix;
  const CMatrix rhs = propagator(l, 1.9).matrix * propagator(l, 0.7).matrix;
  REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("propagator rejects negative and non-finite durations") {
  auto g = rng_for("prop-bad-t");
  const auto l = build_liouvillian(random_generator(2, g, 1));
  REQUIRE_THROWS_AS(propagator(l, -1.0), ValidationError);
  REQUIRE_THROWS_AS(propagator(l, std::numeric_limits<double>::infinity()),
                    ValidationError);
}

TEST_CASE("propagator agrees with Runge-Kutta integration") {
  auto g = rng_for("rk4-check");
  for (int trial = 0; trial < 3; ++trial) {
    const Index n = 4;
    const auto spec = random_generator(n, g, 2);
    const auto rho0 = random_density(n, g);
    const double t = 2.5;
    const auto via_exp = evolve(rho0, propagator(build_liouvillian(spec), t));
    const auto via_rk4 = ode_oracle(spec, rho0, t, 10000);
    REQUIRE((via_exp.matrix - via_rk4.matrix).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("amplitude damping follows the exponential closed form") {
  // Single channel gamma |0><1| from the excited state: the excited
  // population decays as e^(-gamma^2 t) and the coherence at half that rate.
  const double gamma = 0.8, t = 1.7;
  CMatrix l = CMatrix::Zero(2, 2);
  l(0, 1) = gamma;
  const auto spec = GeneratorSpec::validated(CMatrix::Zero(2, 2), {l});
  CMatrix rho0(2, 2);
  rho0 << 0.5, 0.5, 0.5, 0.5;  // |+><+|, maximal coherence
  const auto out = evolve(DensityMatrix::validated(rho0),
                          propagator(build_liouvillian(spec), t));
  const double decay = std::exp(-gamma * gamma * t);
  REQUIRE(out.matrix(1, 1).real() == Catch::Approx(0.5 * decay).margin(1e-12));
  REQUIRE(out.matrix(0, 0).real() == Catch::Approx(1.0 - 0.5 * decay).margin(1e-12));
  REQUIRE(std::abs(out.matrix(0, 1) - Complex(0.5 * std::sqrt(decay), 0.0)) < 1e-12);
}

TEST_CASE("two-level coherent exchange oscillates as sin^2") {
  const double h = 0.9, t = 2.3;
  CMatrix ham(2, 2);
  ham << 0.0, h, h, 0.0;
  const auto spec = GeneratorSpec::validated(ham, {});
  const auto out = evolve(DensityMatrix::basis_state(2, 0),
                          propagator(build_liouvillian(spec), t));
  const double want = std::sin(h * t) * std::sin(h * t);
  REQUIRE(out.matrix(1, 1).real() == Catch::Approx(want).margin(1e-12));
  REQUIRE(out.matrix(0, 0).real() == Catch::Approx(1.0 - want).margin(1e-12));
}

TEST_CASE("single-quantum decay channels keep diagonal states diagonal") {
  auto g = rng_for("diag-preserve");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Index n = 5;
  std::vector<CMatrix> ls;
  for (int k = 0; k < 4; ++k) {
    std::uniform_int_distribution<Index> pick(0, n - 1);
    Index from = pick(g), to = pick(g);
    if (from == to) to = (to + 1) % n;
    CMatrix l = CMatrix::Zero(n, n);
    l(to, from) = u(g);
    ls.push_back(std::move(l));
  }
  const auto spec = GeneratorSpec::validated(CMatrix::Zero(n, n), ls);
  RVector pops(n);
  pops << 0.3, 0.1, 0.25, 0.15, 0.2;
  CMatrix rho0 = CMatrix::Zero(n, n);
  rho0.diagonal() = pops.cast<Complex>();
  const auto out = evolve(DensityMatrix::validated(rho0),
                          propagator(build_liouvillian(spec), 3.0));
  CMatrix off = out.matrix;
  off.diagonal().setZero();
  REQUIRE(off.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("DensityMatrix::validated rejects unphysical inputs") {
  CMatrix not_trace_one = 0.9 * CMatrix::Identity(2, 2);
  REQUIRE_THROWS_AS(DensityMatrix::validated(not_trace_one), NumericError);

  CMatrix not_hermitian = CMatrix::Identity(2, 2) * 0.5;
  not_hermitian(0, 1) = Complex(0.3, 0.0);
  REQUIRE_THROWS_AS(DensityMatrix::validated(not_hermitian), NumericError);

  CMatrix negative = CMatrix::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  REQUIRE_THROWS_AS(DensityMatrix::validated(negative), NumericError);
}

TEST_CASE("GeneratorSpec rejects a non-Hermitian Hamiltonian") {
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 1) = 1.0;  // missing the mirror entry
  REQUIRE_THROWS_AS(GeneratorSpec::validated(h, {}), ValidationError);
}

TEST_CASE("basis_state bounds and population accessor") {
  const auto rho = DensityMatrix::basis_state(3, 1);
  REQUIRE(rho.population(1) == 1.0);
  REQUIRE(rho.population(0) == 0.0);
  REQUIRE_THROWS_AS(DensityMatrix::basis_state(3, 3), ValidationError);
  REQUIRE_THROWS_AS(DensityMatrix::basis_state(3, -1), ValidationError);
}

TEST_CASE("ode_oracle validates steps and duration") {
  auto g = rng_for("ode-validate");
  const auto spec = random_generator(2, g, 1);
  const auto rho = random_density(2, g);
  REQUIRE_THROWS_AS(ode_oracle(spec, rho, 1.0, 0), ValidationError);
  REQUIRE_THROWS_AS(ode_oracle(spec, rho, 1.0, -4), ValidationError);
  REQUIRE_THROWS_AS(ode_oracle(spec, rho, -1.0, 100), ValidationError);
}
