#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "shiftlab/hyperlab.hpp"

using namespace shiftlab;

namespace {
CoeffVec random_tail(std::mt19937& rng, long depth, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> c(static_cast<size_t>(depth));
  for (auto& x : c) x = scale * cplx(u(rng), u(rng));
  return CoeffVec(-depth, std::move(c));
}

std::vector<cplx> exp_tail(const std::vector<cplx>& a_desc, size_t len) {
  std::vector<cplx> e(len, cplx(0.0));
  e[0] = cplx(1.0);
  for (size_t n = 1; n < len; ++n) {
    cplx acc(0.0);
    for (size_t k = 1; k <= n && k < a_desc.size(); ++k)
      acc += static_cast<double>(k) * a_desc[k] * e[n - k];
    e[n] = acc / static_cast<double>(n);
  }
  return e;
}

Hyperfunction make_factorable(long k, const std::vector<cplx>& h_desc,
                              const CoeffVec& g) {
  const std::vector<cplx> e = exp_tail(h_desc, 128);
  CoeffVec eh(-static_cast<long>(e.size()) + 1,
              std::vector<cplx>(e.rbegin(), e.rend()));
  return Hyperfunction::from_coeffs(convolve(eh, g).shifted(-k).trimmed(1e-300));
}
}  // namespace

TEST_CASE("moments of the flat profile are exact") {
  const RadialProfile one = RadialProfile::one();
  for (long n = 0; n <= 24; ++n)
    CHECK(tau_phi(one, n) ==
          doctest::Approx(1.0 / std::sqrt(n + 1.0)).epsilon(1e-14));
  // m_n is increasing in s with m_n(1) = tau^2
  CHECK(one.m_n(3, 0.5) < one.m_n(3, 0.9));
  CHECK(one.m_n(3, 1.0) == doctest::Approx(one.tau2(3)).epsilon(1e-15));
}

TEST_CASE("panel and callable profiles agree") {
  const RadialProfile panels =
      RadialProfile::from_panels({{0.0, 1.0, 1.0}, {0.5, 1.0, 0.5}});
  const RadialProfile fn = RadialProfile::from_function(
      [](double t) { return t < 0.5 ? 1.0 : 1.5; });
  for (long n = 0; n <= 10; ++n)
    CHECK(panels.tau2(n) == doctest::Approx(fn.tau2(n)).epsilon(1e-9));
  for (double s : {0.3, 0.6, 0.95})
    CHECK(panels.m_n(2, s) == doctest::Approx(fn.m_n(2, s)).epsilon(1e-9));
}

TEST_CASE("extension of zeta^{-1} with the flat profile is conj(lambda)") {
  const RadialProfile one = RadialProfile::one();
  const CoeffVec h = CoeffVec::delta(-1);
  for (const cplx lam : {cplx(0.3), cplx(-0.2, 0.4), cplx(0.1, -0.6), cplx(0.0)}) {
    const auto dv = dynkin_extend(h, one, lam);
    CHECK(std::abs(dv.d - std::conj(lam)) <= 1e-10);
  }
  // the density of conj(lambda) is the constant 1/tau^2(0) = 1 times phi^2
  CHECK(std::abs(dynkin_extend(h, one, cplx(0.5)).density - cplx(1.0)) <= 1e-12);
}

TEST_CASE("per-mode area transform against a hand integral") {
  // rho = t, m = 0: 2 lambda^{-1} int_0^{|l|} t^2 dt = 2 |l|^3 / (3 lambda)
  const auto rho = [](double t) { return t; };
  const cplx lam(0.5, 0.2);
  const double al = std::abs(lam);
  CHECK(std::abs(cauchy_mode(0, rho, lam) -
                 2.0 * al * al * al / (3.0 * lam)) <= 1e-11);
  // m = 1: -2 int_{|l|}^1 t dt / 1 = -(1 - |l|^2)
  CHECK(std::abs(cauchy_mode(1, rho, lam) - cplx(-(1.0 - al * al))) <= 1e-11);
}

TEST_CASE("quadrature transform agrees with the per-mode closed form") {
  const auto rho = [](double t) { return t * t * (1.0 - t * t); };
  const auto density = [&](cplx z) {
    const double t = std::abs(z);
    if (t == 0.0) return cplx(0.0);
    const cplx phase = std::conj(z) / t;
    return cplx(rho(t)) * phase * phase;
  };
  for (const cplx lam : {cplx(0.4, 0.3), cplx(-0.6, 0.1)}) {
    const cplx a = cauchy_mode(-2, rho, lam);
    const cplx b = cauchy_transform(density, lam, 16);
    CHECK(std::abs(a - b) <= 1e-7);
  }
}

TEST_CASE("outer Cauchy transform of the density reproduces h") {
  std::mt19937 rng(401);
  const CoeffVec h = random_tail(rng, 12);
  const RadialProfile phi =
      RadialProfile::from_panels({{0.0, 1.0, 1.0}, {0.5, 1.0, 0.5}});
  for (const cplx mu : {cplx(1.5), cplx(-1.2, 0.9), cplx(0.0, 2.0), cplx(1.05)})
    CHECK(std::abs(cauchy_minus_density(h, phi, mu) - eval(h, mu)) <= 1e-8);
}

TEST_CASE("area density matches a Wirtinger finite difference of the extension") {
  std::mt19937 rng(402);
  const CoeffVec h = random_tail(rng, 6);
  const RadialProfile one = RadialProfile::one();
  const double eps = 1e-4;
  for (int i = 0; i < 20; ++i) {
    const double r = 0.2 + 0.03 * i;
    const double th = 0.37 * i;
    const cplx lam(r * std::cos(th), r * std::sin(th));
    const auto d = [&](cplx z) { return dynkin_extend(h, one, z).d; };
    const cplx dbar = ((d(lam + eps) - d(lam - eps)) / (2.0 * eps) +
                       cplx(0.0, 1.0) * (d(lam + cplx(0.0, eps)) -
                                         d(lam - cplx(0.0, eps))) /
                           (2.0 * eps)) /
                      2.0;
    CHECK(std::abs(dbar - dynkin_extend(h, one, lam).density) <= 1e-5);
  }
}

TEST_CASE("profile fit for the Bergman-type target") {
  const Weight target = Weight::from_log_fn(Support::ZPlus, 0, 48, [](long n) {
    return -0.5 * std::log(n + 1.0);
  });
  const PhiFit fit = fit_phi(target);
  CHECK(fit.ratio_inf > 0.0);
  CHECK(fit.ratio_sup / fit.ratio_inf <= 10.0);
  // the fitted profile is a nonnegative panel combination
  REQUIRE(fit.phi.panels() != nullptr);
  for (const auto& p : *fit.phi.panels()) CHECK(p.c >= 0.0);
}

TEST_CASE("profile fit rejects log-concave targets") {
  const Weight target = Weight::from_log_fn(Support::ZPlus, 0, 48, [](long n) {
    return std::sqrt(static_cast<double>(n));
  });
  CHECK_THROWS(fit_phi(target));
}

TEST_CASE("density bound table against the Legendre envelope") {
  std::mt19937 rng(403);
  const CoeffVec h = random_tail(rng, 6);
  const Weight sigma = Weight::from_log_fn(Support::ZMinus, -64, -1, [](long n) {
    return 0.1 * static_cast<double>(n) * static_cast<double>(n);
  });
  std::vector<cplx> grid;
  for (int i = 1; i <= 9; ++i) grid.emplace_back(0.1 * i, 0.0);
  const auto rep = dbar_bound_check(h, RadialProfile::one(), sigma, 0.5, grid);
  CHECK(rep.table.size() == grid.size());
  CHECK(std::isfinite(rep.k_delta));
  CHECK(rep.k_delta > 0.0);
  for (const auto& [r, ratio] : rep.table) CHECK(ratio <= rep.k_delta + 1e-15);
}

TEST_CASE("annulus factorization recovers constructed data") {
  std::mt19937 rng(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const long k : {0L, 2L, 5L}) {
    // h must decay and g must stay near 1 so that both factors are analytic
    // and zero-free in a neighbourhood of the contour
    std::vector<cplx> h_desc{cplx(0.0)};
    for (int i = 1; i <= 6; ++i)
      h_desc.push_back(0.3 * std::pow(0.5, i - 1) * cplx(u(rng), u(rng)));
    CoeffVec g(0, {cplx(1.0)});
    for (int i = 0; i < 3; ++i) g.c.push_back(0.1 * cplx(u(rng), u(rng)));
    const Hyperfunction f = make_factorable(k, h_desc, g);
    const auto res = annulus_factorize(f, 0.7, 256);
    CHECK(res.k == k);
    CHECK(res.residual <= 1e-9);
    CHECK(res.winding_snap <= 1e-6);
    // h carries no constant term: the factor e^h tends to 1 at infinity
    CHECK(res.h.at(0) == cplx(0.0));
    for (size_t i = 1; i < h_desc.size(); ++i)
      CHECK(std::abs(res.h.at(-static_cast<long>(i)) - h_desc[i]) <= 1e-9);
  }
}

TEST_CASE("pure monomial factorizes with trivial h and g") {
  const Hyperfunction f =
      Hyperfunction::from_coeffs(CoeffVec::delta(-2, cplx(3.0)));
  const auto res = annulus_factorize(f, 0.7, 128);
  CHECK(res.k == 2);
  CHECK(res.residual <= 1e-10);
  CHECK(std::abs(eval(res.g, cplx(0.0)) - cplx(3.0)) <= 1e-9);
}

TEST_CASE("factorization rejects contours through zeros") {
  // z - 0.7 vanishes on the circle |z| = 0.7
  const Hyperfunction f(CoeffVec(0, {cplx(-0.7), cplx(1.0)}), CoeffVec(-1, {}));
  CHECK_THROWS(annulus_factorize(f, 0.7, 128));
}

TEST_CASE("norm trend of the inverse bilateral shift") {
  GrowthProfile prof;
  prof.log_t_norms.assign(221, 0.0);
  const Weight tail = Weight::from_log_fn(Support::ZMinus, -260, -1, [](long n) {
    return std::pow(static_cast<double>(-n), 0.7);
  });
  const auto trend = lemma82_trend(prof, tail, 220);
  REQUIRE(trend.size() == 220);
  for (const auto& pt : trend)
    if (pt.n >= 100) {
      CHECK(pt.ratio >= 0.85);
      CHECK(pt.ratio <= 1.15);
    }
}

TEST_CASE("annihilation system and the extension identity") {
  std::mt19937 rng(405);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> gc(7);
  for (auto& x : gc) x = cplx(u(rng), u(rng));
  const CoeffVec g(0, std::move(gc));
  const CoeffVec h = random_tail(rng, 5);

  const auto pair = build_annihilator(g, h, 8, 6, 4);
  CHECK(pair.system_residual <= 1e-10);

  std::vector<cplx> grid;
  for (int i = 0; i < 32; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 32.0;
    const double r = (i % 2 == 0) ? 0.4 : 0.7;
    grid.emplace_back(r * std::cos(th), r * std::sin(th));
  }
  const auto res = prop84_residual(g, h, RadialProfile::one(), grid);
  CHECK(res.l.system_residual <= 1e-10);
  CHECK(res.max_residual <= 1e-7);
  const auto j = res.to_json();
  CHECK(j.contains("max_residual"));
}
