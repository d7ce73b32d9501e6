#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "shiftlab/series.hpp"

using namespace shiftlab;

namespace {
CoeffVec random_window(std::mt19937& rng, long n_lo, long len) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> c(static_cast<size_t>(len));
  for (auto& x : c) x = cplx(u(rng), u(rng));
  return CoeffVec(n_lo, std::move(c));
}
}  // namespace

TEST_CASE("convolution matches the direct double sum") {
  std::mt19937 rng(101);
  const CoeffVec a = random_window(rng, -4, 9);
  const CoeffVec b = random_window(rng, -2, 7);
  const CoeffVec got = convolve(a, b);
  for (long n = got.n_lo; n <= got.n_hi(); ++n) {
    cplx direct(0.0);
    for (long k = a.n_lo; k <= a.n_hi(); ++k) direct += a.at(k) * b.at(n - k);
    CHECK(std::abs(got.at(n) - direct) <= 1e-13);
  }
}

TEST_CASE("fft round trip and the convolution theorem") {
  std::mt19937 rng(102);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<cplx> x(128);
  for (auto& v : x) v = cplx(u(rng), u(rng));
  auto y = x;
  fft(y, false);
  fft(y, true);
  for (size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - y[i]) <= 1e-12);

  // samples of a product equal products of samples
  const CoeffVec a = random_window(rng, 0, 5);
  const CoeffVec b = random_window(rng, 0, 6);
  const CoeffVec ab = convolve(a, b);
  const auto sa = circle_samples(a, 0.9, 32);
  const auto sb = circle_samples(b, 0.9, 32);
  const auto sab = circle_samples(ab, 0.9, 32);
  for (size_t k = 0; k < 32; ++k) CHECK(std::abs(sab[k] - sa[k] * sb[k]) <= 1e-12);
}

TEST_CASE("evaluation: plus part inside, minus part outside, unit circle rejected") {
  const Hyperfunction f(CoeffVec(0, {cplx(1.0), cplx(2.0)}),
                        CoeffVec(-2, {cplx(5.0), cplx(3.0)}));
  // inside: 1 + 2z
  CHECK(std::abs(eval(f, cplx(0.5)) - cplx(2.0)) <= 1e-14);
  // outside: 3/z + 5/z^2
  const cplx z(2.0, 0.0);
  CHECK(std::abs(eval(f, z) - (3.0 / z + 5.0 / (z * z))) <= 1e-14);
  CHECK_THROWS(eval(f, cplx(1.0)));
}

TEST_CASE("full Laurent window evaluation") {
  const CoeffVec f(-2, {cplx(1.0), cplx(0.0), cplx(3.0), cplx(2.0)});
  const cplx z(0.5, 0.25);
  const cplx direct = 1.0 / (z * z) + 3.0 + 2.0 * z;
  CHECK(std::abs(eval(f, z) - direct) <= 1e-13);
}

TEST_CASE("circle sampling inverts exactly on in-band windows") {
  std::mt19937 rng(103);
  const CoeffVec f = random_window(rng, -10, 21);
  const auto samples = circle_samples(f, 0.75, 64);
  const CoeffVec back = circle_coeffs(samples, 0.75, -10, 10);
  CHECK(back.l2_dist(f) <= 1e-10);
}

TEST_CASE("circle_coeffs alias guard rejects out-of-band energy") {
  std::mt19937 rng(104);
  const CoeffVec f = random_window(rng, 0, 30);  // degree 29 content
  const auto samples = circle_samples(f, 0.9, 32);
  CHECK_THROWS(circle_coeffs(samples, 0.9, 0, 7));  // bins 8..29 are loud
}

TEST_CASE("pairing is the bilinear coefficient sum") {
  std::mt19937 rng(105);
  const Hyperfunction f(random_window(rng, 0, 8), CoeffVec(-1, {}));
  const CoeffVec h = random_window(rng, -9, 9);
  cplx direct(0.0);
  for (long n = 0; n <= 7; ++n) direct += f.at(n) * h.at(-n - 1);
  CHECK(std::abs(pair_with(f, h) - direct) <= 1e-13);
}

TEST_CASE("window helpers: split, shift, trim") {
  const CoeffVec f(-2, {cplx(1.0), cplx(2.0), cplx(0.0), cplx(4.0)});
  CHECK(f.plus_part().n_lo == 0);
  CHECK(f.plus_part().at(1) == cplx(4.0));
  CHECK(f.minus_part().n_hi() == -1);
  CHECK(f.minus_part().at(-2) == cplx(1.0));
  CHECK(f.shifted(3).at(1) == cplx(1.0));
  const CoeffVec g(0, {cplx(0.0), cplx(1.0), cplx(0.0)});
  CHECK(g.trimmed().size() == 1);
  CHECK(g.trimmed().n_lo == 1);
}

TEST_CASE("hyperfunction JSON round trip and window validation") {
  const Hyperfunction f(CoeffVec(0, {cplx(1.0, 2.0)}), CoeffVec(-2, {cplx(0.5), cplx(-1.0)}));
  const Hyperfunction back = Hyperfunction::from_json(f.to_json());
  CHECK(back.merged().l2_dist(f.merged()) <= 1e-15);
  // a "minus" window reaching into Z+ is rejected
  CHECK_THROWS(Hyperfunction(CoeffVec(0, {cplx(1.0)}), CoeffVec(-1, {cplx(1.0), cplx(1.0)})));
}

TEST_CASE("coefficient bound from the maximum modulus") {
  std::mt19937 rng(106);
  const CoeffVec f = random_window(rng, 0, 12);
  for (long n : {0L, 3L, 7L}) {
    const auto cb = cauchy_coeff_bound(f, 0.9, n);
    CHECK(std::abs(f.at(n)) <= cb.bound * (1.0 + 1e-9));
    CHECK(cb.satisfied);
  }
}
