#include "doctest.h"

#include "isplines/losses.hpp"
#include "support.hpp"

using namespace isplines;
namespace t = isplines::testing;

namespace {

t::OracleLoss oracle_kind(LossKind k) {
  switch (k) {
    case LossKind::MMAE: return t::OracleLoss::MMAE;
    case LossKind::MMSE: return t::OracleLoss::MMSE;
    case LossKind::Accuracy: return t::OracleLoss::Accuracy;
    case LossKind::Dice: return t::OracleLoss::Dice;
    case LossKind::Jaccard: return t::OracleLoss::Jaccard;
  }
  return t::OracleLoss::Dice;
}

// Central differences of a field loss with respect to each entry of Z.
Matrix fd_field(const Field& z, const BinaryMask& y, LossKind kind, double h, double eps = kDefaultEpsilon) {
  Matrix g(z.rows(), z.cols());
  Field work = z;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double base = work.data()[k];
    work.data()[k] = base + h;
    const double up = field_loss(work, y, kind, eps).value;
    work.data()[k] = base - h;
    const double down = field_loss(work, y, kind, eps).value;
    work.data()[k] = base;
    g.data()[k] = (up - down) / (2 * h);
  }
  return g;
}

constexpr LossKind kAll[] = {LossKind::MMAE, LossKind::MMSE, LossKind::Accuracy, LossKind::Dice, LossKind::Jaccard};
constexpr LossKind kRegion[] = {LossKind::Accuracy, LossKind::Dice, LossKind::Jaccard};

}  // namespace

TEST_CASE("names") {
  for (auto k : kAll) CHECK(parse_loss_kind(to_string(k)) == k);
  CHECK_FALSE(parse_loss_kind("bce").has_value());
}

TEST_CASE("signed_mask") {
  BinaryMask y(2, 2);
  y << 0, 1, 1, 0;
  Matrix expected(2, 2);
  expected << -1, 1, 1, -1;
  CHECK(signed_mask(y) == expected);
  CHECK(signed_mask(BinaryMask::Zero(3, 3)) == Matrix::Constant(3, 3, -1.0));
  std::mt19937_64 rng(3);
  const BinaryMask r = t::random_mask(rng, 9, 7);
  CHECK((((signed_mask(r).array() + 1.0) / 2.0).cast<std::uint8_t>() == r.array()).all());
  y(0, 0) = 2;
  CHECK_THROWS_AS(validate_mask(y), std::invalid_argument);
}

TEST_CASE("smooth_indicator") {
  CHECK(smooth_indicator(0.0, 1e-4) == 0.5);
  CHECK(smooth_indicator(1e-4, 1e-4) == doctest::Approx(0.75).epsilon(1e-15));
  // eps / (2 (eps + 1e6)) = 1e-4 / 2e6 = 5e-11
  const double far = smooth_indicator(-1e6, 1e-4);
  CHECK(far > 0.0);
  CHECK(far == doctest::Approx(5e-11).epsilon(1e-9));
  CHECK(smooth_indicator_derivative(0.0, 1e-4) == doctest::Approx(1.0 / 2e-4));
  CHECK_THROWS_AS(smooth_indicator(Field::Zero(2, 2), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(smooth_indicator(Field::Zero(2, 2), -1.0), std::invalid_argument);

  SUBCASE("monotone and inside (0,1)") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-50, 50);
    for (int k = 0; k < 2000; ++k) {
      double a = d(rng), b = d(rng);
      if (a > b) std::swap(a, b);
      if (a == b) continue;
      const double ha = smooth_indicator(a, 1e-2), hb = smooth_indicator(b, 1e-2);
      CHECK(ha < hb);
      CHECK(ha > 0.0);
      CHECK(hb < 1.0);
    }
  }
  SUBCASE("derivative matches central differences") {
    for (double z : {-3.0, -0.4, 0.05, 0.7, 2.0}) {
      const double h = 1e-6;
      const double fd = (smooth_indicator(z + h, 0.1) - smooth_indicator(z - h, 0.1)) / (2 * h);
      CHECK(std::abs(fd - smooth_indicator_derivative(z, 0.1)) <= 1e-7 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("mmae and mmse") {
  std::mt19937_64 rng(17);
  const BinaryMask y = t::random_mask(rng, 4, 4);
  const Matrix yhat = signed_mask(y);

  auto perfect = loss_mmae(yhat, y);
  CHECK(perfect.value == 0.0);
  CHECK(perfect.grad.isZero(0.0));
  CHECK(loss_mmae(Field::Zero(4, 4), y).value == 1.0);
  CHECK(loss_mmse(yhat, y).value == 0.0);
  CHECK(loss_mmse(Field::Zero(4, 4), y).value == 1.0);

  SUBCASE("random 4x4 mmae") {
    Field z = t::random_matrix(rng, 4, 4, -2, 2);
    double direct = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) direct += std::abs(z.data()[k] - yhat.data()[k]);
    direct /= 16.0;
    const auto l = loss_mmae(z, y);
    CHECK(l.value == doctest::Approx(direct).epsilon(1e-15));
    REQUIRE((z - yhat).cwiseAbs().minCoeff() > 1e-3);  // away from kinks
    CHECK(t::max_relative_error(l.grad, fd_field(z, y, LossKind::MMAE, 1e-5), 0.0) <= 1e-6);
  }
  SUBCASE("random 8x8 mmse") {
    const BinaryMask y8 = t::random_mask(rng, 8, 8);
    const Field z = t::random_matrix(rng, 8, 8, -2, 2);
    const auto l = loss_mmse(z, y8);
    CHECK(t::max_relative_error(l.grad, fd_field(z, y8, LossKind::MMSE, 1e-5), 0.0) <= 1e-6);
  }
  SUBCASE("sign(0) = 0") {
    const auto l = loss_mmae(yhat, y);
    CHECK(l.grad.isZero(0.0));
  }
  CHECK_THROWS_AS(loss_mmse(Field::Zero(3, 4), y), std::invalid_argument);
}

TEST_CASE("region loss examples") {
  const BinaryMask zeros = BinaryMask::Zero(8, 8);
  const Field z0 = Field::Zero(8, 8);
  CHECK(loss_region(z0, zeros, LossKind::Accuracy).value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(loss_region(z0, zeros, LossKind::Dice).value == 1.0);
  CHECK(loss_region(z0, zeros, LossKind::Jaccard).value == 1.0);

  const BinaryMask ones = BinaryMask::Ones(8, 8);
  for (auto k : kRegion) {
    double prev = 1.0;
    for (double big : {1.0, 10.0, 1e3, 1e6}) {
      const double v = loss_region(Field::Constant(8, 8, big), ones, k).value;
      CHECK(v < prev);
      prev = v;
    }
    CHECK(prev < 1e-9);
  }
  CHECK_THROWS_AS(loss_region(Field(0, 0), BinaryMask(0, 0), LossKind::Dice), std::invalid_argument);
  CHECK_THROWS_AS(loss_region(z0, zeros, LossKind::Dice, 0.0), std::invalid_argument);
}

TEST_CASE("region loss properties") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 9;
    const Field z = t::random_matrix(rng, n, n, -1, 1) * std::pow(10.0, trial % 5 - 3);
    const BinaryMask y = t::random_mask(rng, n, n, (trial % 7) / 6.0);
    const double d = loss_region(z, y, LossKind::Dice).value;
    const double j = loss_region(z, y, LossKind::Jaccard).value;
    const double a = loss_region(z, y, LossKind::Accuracy).value;
    for (double v : {d, j, a}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(d <= j + 1e-15);
    const double sj = 1 - j;
    CHECK(std::abs((1 - d) - 2 * sj / (1 + sj)) <= 1e-12);
    CHECK(loss_mmae(z, y).value >= 0.0);
    CHECK(loss_mmse(z, y).value >= 0.0);

    // transposition symmetry
    const Field zt = z.transpose();
    const BinaryMask yt = y.transpose();
    for (auto k : kAll) {
      const auto l = field_loss(z, y, k);
      const auto lt = field_loss(zt, yt, k);
      CHECK(std::abs(l.value - lt.value) <= 1e-13);
      CHECK((l.grad.transpose() - lt.grad).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, l.grad.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("perfect-prediction limit is monotone") {
  std::mt19937_64 rng(29);
  const BinaryMask y = t::random_mask(rng, 10, 10);
  const Matrix yhat = signed_mask(y);
  for (auto k : kRegion) {
    double prev = 2.0;
    for (double m = 1e-3; m <= 1e4; m *= 3.0) {
      const double v = loss_region(m * yhat, y, k).value;
      CHECK(v < prev);
      prev = v;
    }
    CHECK(prev < 1e-6);
  }
}

TEST_CASE("region gradients against finite differences on the field") {
  std::mt19937_64 rng(31);
  for (auto k : kRegion) {
    for (int trial = 0; trial < 5; ++trial) {
      // eps = 0.5 keeps dL/dZ large enough for float64 central differences;
      // the default eps is covered in long double by the end-to-end check
      Field z = t::random_matrix(rng, 8, 8, 0.5, 3.0);
      for (Eigen::Index m = 0; m < z.size(); ++m)
        if (rng() & 1) z.data()[m] = -z.data()[m];
      const BinaryMask y = t::random_mask(rng, 8, 8);
      const auto l = loss_region(z, y, k, 0.5);
      const Matrix fd = fd_field(z, y, k, 1e-5, 0.5);
      CHECK(t::max_relative_error(l.grad, fd) <= 1e-6);
    }
  }
}

TEST_CASE("backprop_to_coefficients") {
  std::mt19937_64 rng(37);
  const CollocationMatrix u(24, SplineSpace(6, 1));
  CHECK(backprop_to_coefficients(Matrix::Zero(24, 24), u).isZero(0.0));

  SUBCASE("linearity") {
    const Matrix g1 = t::random_matrix(rng, 24, 24, -1, 1);
    const Matrix g2 = t::random_matrix(rng, 24, 24, -1, 1);
    const Matrix lhs = backprop_to_coefficients(Matrix(0.3 * g1 - 1.7 * g2), u);
    const Matrix rhs = 0.3 * backprop_to_coefficients(g1, u) - 1.7 * backprop_to_coefficients(g2, u);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("adjoint identity <G, U C U^T> = <U^T G U, C>") {
    const Matrix g = t::random_matrix(rng, 24, 24, -1, 1);
    const Matrix c = t::random_matrix(rng, 6, 6, -1, 1);
    const double lhs = (g.array() * evaluate_grid(u, c).array()).sum();
    const double rhs = (backprop_to_coefficients(g, u).array() * c.array()).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
  SUBCASE("end-to-end gradient for every loss") {
    for (auto k : kAll) {
      CAPTURE(to_string(k));
      for (int trial = 0; trial < 3; ++trial) {
        const auto inst = t::gradient_instance(rng, 6, 1, 24, k == LossKind::MMAE);
        const LossReport rep = evaluate_loss(u, inst.c, inst.y, k);
        const Matrix fd = t::fd_gradient(inst.c, 1, inst.y, oracle_kind(k), kDefaultEpsilon, 1e-5);
        CHECK(t::max_relative_error(rep.grad_coefficients, fd) <= 1e-6);
        CHECK(rep.kind == k);
      }
    }
  }
  CHECK_THROWS_AS(backprop_to_coefficients(Matrix::Zero(23, 24), u), std::invalid_argument);
}

TEST_CASE("evaluate_loss validation") {
  const CollocationMatrix u(10, SplineSpace(4, 1));
  BinaryMask y = BinaryMask::Zero(10, 10);
  CHECK_THROWS_AS(evaluate_loss(u, Matrix::Zero(4, 4), BinaryMask::Zero(9, 10), LossKind::Dice),
                  std::invalid_argument);
  CHECK_THROWS_AS(evaluate_loss(u, Matrix::Zero(5, 5), y, LossKind::Dice), std::invalid_argument);
  y(2, 3) = 7;
  CHECK_THROWS_AS(evaluate_loss(u, Matrix::Zero(4, 4), y, LossKind::Dice), std::invalid_argument);
}

TEST_CASE("batch loss is the mean of slice losses") {
  std::mt19937_64 rng(41);
  const SplineSpace s(5, 2);
  const CollocationMatrix u(16, s);
  std::vector<CoefficientGrid> grids;
  std::vector<BinaryMask> masks;
  for (int b = 0; b < 4; ++b) {
    grids.emplace_back(s, t::random_matrix(rng, 5, 5, -2, 2));
    masks.push_back(t::random_mask(rng, 16, 16));
  }
  for (auto k : kAll) {
    const auto batch = evaluate_batch_loss(u, grids, masks, k, kDefaultEpsilon, 2);
    double mean = 0.0;
    REQUIRE(batch.grad_coefficients.size() == 4);
    for (std::size_t b = 0; b < 4; ++b) {
      const auto single = evaluate_loss(u, grids[b], masks[b], k);
      mean += single.loss / 4.0;
      CHECK((batch.grad_coefficients[b] - single.grad_coefficients / 4.0).cwiseAbs().maxCoeff() <= 1e-15);
    }
    CHECK(batch.loss == doctest::Approx(mean).epsilon(1e-14));
  }
  CHECK_THROWS_AS(evaluate_batch_loss(u, grids, std::span<const BinaryMask>(masks).first(3), LossKind::Dice),
                  std::invalid_argument);
}
