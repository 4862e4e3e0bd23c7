#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "pttr/bev/fusion.hpp"
#include "pttr/bev/grid.hpp"
#include "pttr/model.hpp"
#include "oracles.hpp"

using namespace pttr;
using namespace pttr::testing;
using Eigen::Vector3d;

namespace {

const BevGeometry kSmall = BevGeometry::from_range(-1.2, 1.2, -1.2, 1.2, -1.0, 1.0, 0.3);  // 8 x 8

Points slab_points(int n, RandomState& rng, double extent, double z = 0.9) {
  Points p(n, 3);
  for (int i = 0; i < n; ++i) p.row(i) << rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-z, z);
  return p;
}

}  // namespace

TEST_CASE("geometry validation and cell lookup") {
  const BevGeometry g = BevGeometry::from_range(-4.8, 4.8, -4.8, 4.8, -1.5, 1.5, 0.3);
  CHECK(g.h == 32);
  CHECK(g.w == 32);
  CHECK(g.x_max() == doctest::Approx(4.8));
  CHECK_THROWS_AS(BevGeometry::from_range(-1, 1, -1, 1, -1, 1, 0.3), ConfigError);
  CHECK_THROWS_AS(BevGeometry::from_range(1, -1, -1, 1, -1, 1, 0.5), ConfigError);
  CHECK(g.cell_of(-4.8, -4.8, 0).value() == 0);
  CHECK(!g.cell_of(4.8, 0, 0).has_value());
  CHECK(g.cell_of(0, 0, 1.5).has_value());
  CHECK(!g.cell_of(0, 0, 1.51).has_value());
  CHECK(g.cell_of(-4.8 + 0.45, -4.8, 0).value() == 1);
  CHECK(g.cell_of(-4.8 + 0.45, -4.8 + 0.45, 0).value() == 33);
  CHECK(g.downsampled(8).h == 4);
  CHECK_THROWS_AS(g.downsampled(3), ConfigError);
}

TEST_CASE("pillarize examples and floor oracle") {
  const BevGeometry& g = kSmall;
  const Eigen::Vector2d c = g.cell_center(9);
  Points one(1, 3);
  one << c.x(), c.y(), 0.2;
  const auto p = pillarize(one, g, Vector3d(1.0, 2.0, 1.5));
  REQUIRE(p.pillar_count() == 1);
  CHECK(p.cells[0] == 9);
  CHECK(p.rows(0, 6) == 0.0);
  CHECK(p.rows(0, 7) == 0.0);
  CHECK(p.rows.row(0).segment(3, 3) == p.rows.row(0).head(3));
  CHECK(p.rows(0, 8) == 1.0);   // w
  CHECK(p.rows(0, 9) == 1.5);   // h
  CHECK(p.rows(0, 10) == 2.0);  // l

  Points two(2, 3);
  two << c.x() - 0.1, c.y(), 0.0, c.x() + 0.05, c.y() + 0.1, 0.6;
  const auto q = pillarize(two, g, Vector3d::Ones());
  REQUIRE(q.pillar_count() == 1);
  const Eigen::RowVector3d mean = two.colwise().mean();
  CHECK((q.rows.row(0).segment(3, 3) - mean).norm() < 1e-15);
  CHECK(q.rows.row(1).segment(3, 3) == q.rows.row(0).segment(3, 3));

  RandomState rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Points pts = slab_points(40, rng, 1.5, 1.2);
    const auto r = pillarize(pts, g, Vector3d::Ones());
    std::vector<Index> expected_cell(40);
    int inside = 0;
    for (int i = 0; i < 40; ++i) inside += (expected_cell[static_cast<std::size_t>(i)] = oracle_cell(g, pts.row(i))) >= 0;
    CHECK(r.rows.rows() == inside);
    for (std::size_t s = 0; s < r.pillar_count(); ++s) {
      for (Index j = r.offsets[s]; j < r.offsets[s + 1]; ++j) {
        CHECK(expected_cell[static_cast<std::size_t>(r.source[static_cast<std::size_t>(j)])] == r.cells[s]);
      }
    }
  }
}

TEST_CASE("encode_pillars examples and permutation invariance") {
  RandomState rng(2);
  const MatrixD enc = random_matrix(11, 6, rng);
  const Points pts = slab_points(30, rng, 1.1);
  const auto pillars = pillarize(pts, kSmall, Vector3d(1, 2, 1));
  const auto grid = encode_pillars(pillars, TensorD(enc));
  CHECK(grid.features.rows() == 64);
  std::vector<bool> occupied(64, false);
  for (Index c : pillars.cells) occupied[static_cast<std::size_t>(c)] = true;
  for (Index c = 0; c < 64; ++c) {
    if (!occupied[static_cast<std::size_t>(c)]) CHECK(grid.features.value().row(c).isZero(0));
  }
  for (std::size_t s = 0; s < pillars.pillar_count(); ++s) {
    if (pillars.offsets[s + 1] - pillars.offsets[s] != 1) continue;
    const MatrixD e = pillars.rows.row(pillars.offsets[s]) * enc;
    CHECK((grid.features.value().row(pillars.cells[s]) - e).cwiseAbs().maxCoeff() < 1e-14);
  }

  std::vector<int> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Points shuffled(30, 3);
    for (int i = 0; i < 30; ++i) shuffled.row(i) = pts.row(perm[static_cast<std::size_t>(i)]);
    CHECK(encode_pillars(pillarize(shuffled, kSmall, Vector3d(1, 2, 1)), TensorD(enc)).features.value() ==
          grid.features.value());
  }

  const auto empty = encode_pillars(pillarize(Points(0, 3), kSmall, Vector3d::Ones()), TensorD(enc));
  CHECK(empty.features.value().isZero(0));
  CHECK_THROWS_AS(encode_pillars(pillars, TensorD(random_matrix(10, 6, rng))), DimensionError);
}

TEST_CASE("encode_pillars gradient") {
  RandomState rng(3);
  for (int instance = 0; instance < 5; ++instance) {
    auto enc = leaf(random_matrix(11, 4, rng));
    const auto pillars = pillarize(slab_points(20, rng, 1.0), kSmall, Vector3d(1, 2, 1));
    const MatrixD probe = random_matrix(64, 4, rng);
    CHECK(gradient_error([&] { return project(encode_pillars(pillars, enc).features, probe); }, {enc}) < 1e-4);
  }
}

TEST_CASE("bev_match shapes and position sensitivity") {
  RandomState rng(4);
  PrtWeights<double> prt("bev.prt", 8, 1, {}, rng);
  const BevGeometry tg = BevGeometry::from_range(-0.6, 0.6, -0.6, 0.6, -1, 1, 0.3);
  const BevGrid<double> search{kSmall, TensorD(random_matrix(64, 8, rng))};
  MatrixD t = MatrixD::Zero(16, 8);
  t.row(5) = random_matrix(1, 8, rng);
  const auto out = bev_match(search, BevGrid<double>{tg, TensorD(t)}, prt);
  CHECK(out.geometry == kSmall);
  CHECK(out.features.rows() == 64);
  MatrixD moved = MatrixD::Zero(16, 8);
  moved.row(10) = t.row(5);
  const auto out2 = bev_match(search, BevGrid<double>{tg, TensorD(moved)}, prt);
  CHECK((out.features.value() - out2.features.value()).norm() > 1e-6);

  const auto z1 = bev_match(BevGrid<double>{kSmall, TensorD::zeros(64, 8)}, BevGrid<double>{tg, TensorD::zeros(16, 8)}, prt);
  const auto z2 = bev_match(BevGrid<double>{kSmall, TensorD::zeros(64, 8)}, BevGrid<double>{tg, TensorD::zeros(16, 8)}, prt);
  CHECK(z1.features.value() == z2.features.value());
  CHECK(z1.features.value().allFinite());
}

TEST_CASE("bev_match gradient") {
  RandomState rng(5);
  PrtWeights<double> prt("bev.prt", 4, 1, {}, rng);
  const BevGeometry sg = BevGeometry::from_range(-0.6, 0.6, -0.6, 0.6, -1, 1, 0.3);
  ParameterList<double> params;
  prt.collect(params);
  for (int instance = 0; instance < 5; ++instance) {
    auto s = leaf(random_matrix(16, 4, rng));
    auto t = leaf(random_matrix(16, 4, rng));
    std::vector<TensorD> inputs{s, t};
    for (auto& p : params) inputs.push_back(p.tensor());
    const MatrixD probe = random_matrix(16, 4, rng);
    auto loss = [&] { return project(bev_match(BevGrid<double>{sg, s}, BevGrid<double>{sg, t}, prt).features, probe); };
    CHECK(gradient_error(loss, inputs) < 1e-4);
  }
}

TEST_CASE("bev backbone shape contract, zero input and gradient") {
  RandomState rng(6);
  const BevGeometry g = BevGeometry::from_range(-4.8, 4.8, -4.8, 4.8, -1.5, 1.5, 0.3);
  BevBackbone<float> net("bev.backbone", 8, {8, 8, 16}, rng);
  const auto out = net(BevGrid<float>{g, Tensor<float>(Matrix<float>::Random(1024, 8))});
  CHECK(out.geometry.h == 4);
  CHECK(out.geometry.w == 4);
  CHECK(out.features.rows() == 16);
  CHECK(out.features.cols() == 16);
  CHECK(out.geometry.cell == doctest::Approx(2.4));

  ParameterList<float> params;
  net.collect(params);
  for (auto& p : params) {
    if (p.name().back() == 'b') p.tensor().mutable_value().setZero();
  }
  CHECK(net(BevGrid<float>{g, Tensor<float>::zeros(1024, 8)}).features.value().isZero(0));
  const BevGeometry odd = BevGeometry::from_range(-1.5, 1.5, -1.2, 1.2, -1, 1, 0.3);  // 8 x 10
  CHECK_THROWS_AS(net(BevGrid<float>{odd, Tensor<float>::zeros(80, 8)}), ConfigError);

  BevBackbone<double> small("bev.backbone", 3, {4, 5}, rng);
  ParameterList<double> dp;
  small.collect(dp);
  for (int instance = 0; instance < 5; ++instance) {
    auto x = leaf(random_matrix(64, 3, rng));
    std::vector<TensorD> inputs{x};
    for (auto& p : dp) inputs.push_back(p.tensor());
    const MatrixD probe = random_matrix(4, 5, rng);
    CHECK(gradient_error([&] { return project(small(BevGrid<double>{kSmall, x}).features, probe); }, inputs) < 1e-4);
  }
}

TEST_CASE("point_to_bev examples and brute force") {
  const Eigen::Vector2d c = kSmall.cell_center(20);
  Points two(3, 3);
  two << c.x(), c.y(), 0, c.x() + 0.1, c.y() - 0.1, 0.5, 5, 5, 0;
  MatrixD f(3, 2);
  f << 1, 2, 3, 6, 100, 100;
  const auto g = point_to_bev(TensorD(f), two, kSmall);
  CHECK(g.features.value().row(20) == Eigen::RowVector2d(2, 4));
  CHECK(g.features.value().sum() == 6.0);

  RandomState rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Points pts = slab_points(25, rng, 1.4, 1.2);
    const MatrixD feats = random_matrix(25, 3, rng);
    const auto grid = point_to_bev(TensorD(feats), pts, kSmall);
    CHECK((grid.features.value() - scatter_mean_reference(feats, pts, kSmall)).cwiseAbs().maxCoeff() < 1e-14);
  }
  auto x = leaf(random_matrix(25, 3, rng));
  const Points pts = slab_points(25, rng, 1.1);
  const MatrixD probe = random_matrix(64, 3, rng);
  CHECK(gradient_error([&] { return project(point_to_bev(x, pts, kSmall).features, probe); }, {x}) < 1e-4);
}

TEST_CASE("bev_to_point examples and bilinear oracle") {
  RandomState rng(8);
  const MatrixD f = random_matrix(64, 4, rng);
  const BevGrid<double> grid{kSmall, TensorD(f)};
  Points q(2, 3);
  const Eigen::Vector2d c0 = kSmall.cell_center(19), c1 = kSmall.cell_center(20);
  q.row(0) << c0.x(), c0.y(), 0;
  q.row(1) << (c0.x() + c1.x()) / 2, c0.y(), 0;
  const auto s = bev_to_point(grid, q);
  CHECK(s.value().row(0) == f.row(19));
  CHECK((s.value().row(1) - (f.row(19) + f.row(20)) / 2).norm() < 1e-12);

  for (int trial = 0; trial < 100; ++trial) {
    const Points pts = slab_points(20, rng, 1.6);
    const auto out = bev_to_point(grid, pts);
    for (int i = 0; i < 20; ++i) {
      CHECK((out.value().row(i) - oracle_bilinear(f, kSmall, pts(i, 0), pts(i, 1))).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
  auto x = leaf(f);
  const Points pts = slab_points(10, rng, 1.4);
  const MatrixD probe = random_matrix(10, 4, rng);
  CHECK(gradient_error([&] { return project(bev_to_point(BevGrid<double>{kSmall, x}, pts), probe); }, {x}) < 1e-4);
}

TEST_CASE("point to bev then back is the identity on singly occupied cells") {
  RandomState rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> cells = sample_random(64, 12, rng).indices;
    Points pts(12, 3);
    for (int i = 0; i < 12; ++i) {
      const Eigen::Vector2d c = kSmall.cell_center(cells[static_cast<std::size_t>(i)]);
      pts.row(i) << c.x(), c.y(), rng.uniform(-0.5, 0.5);
    }
    const MatrixD f = random_matrix(12, 5, rng);
    const auto back = bev_to_point(point_to_bev(TensorD(f), pts, kSmall), pts);
    CHECK(back.value() == f);
  }
}

TEST_CASE("selective fusion examples and convexity") {
  RandomState rng(10);
  SeWeights<double> se("fuse.se", 8, 4, rng);
  CHECK_THROWS_AS(SeWeights<double>("x", 10, 4, rng), ConfigError);
  for (FusionMode mode : {FusionMode::Global, FusionMode::PointWise}) {
    const MatrixD a = random_matrix(6, 8, rng), b = random_matrix(6, 8, rng);
    CHECK((selective_fuse(TensorD(a), TensorD(a), mode, se).value() - a).cwiseAbs().maxCoeff() < 1e-15);
    const MatrixD fused = selective_fuse(TensorD(a), TensorD(b), mode, se).value();
    // A convex combination rounded once per product and once per sum.
    const double tol = 4 * std::numeric_limits<double>::epsilon();
    CHECK((fused.array() >= a.cwiseMin(b).array() - tol).all());
    CHECK((fused.array() <= a.cwiseMax(b).array() + tol).all());
  }
  CHECK(selective_fuse(TensorD(MatrixD::Ones(2, 8)), TensorD(MatrixD::Ones(2, 8)), FusionMode::Addition, se).value() ==
        MatrixD::Constant(2, 8, 2.0));

  SeWeights<float> sat("fuse.se", 8, 4, rng);
  sat.up.weight().tensor().mutable_value().setZero();
  sat.up.bias().tensor().mutable_value().setConstant(100.0f);
  const Matrix<float> a = random_matrix(5, 8, rng).cast<float>(), b = random_matrix(5, 8, rng).cast<float>();
  CHECK(selective_fuse(Tensor<float>(a), Tensor<float>(b), FusionMode::PointWise, sat).value() == a);
  CHECK(selective_fuse(Tensor<float>(a), Tensor<float>(b), FusionMode::Global, sat).value() == a);

  const auto gate = fusion_gate(TensorD(random_matrix(6, 8, rng)), TensorD(random_matrix(6, 8, rng)), FusionMode::Global, se);
  CHECK(gate.rows() == 1);
}

TEST_CASE("selective fusion gradient") {
  RandomState rng(11);
  SeWeights<double> se("fuse.se", 8, 2, rng);
  ParameterList<double> params;
  se.collect(params);
  for (FusionMode mode : {FusionMode::Addition, FusionMode::Global, FusionMode::PointWise}) {
    for (int instance = 0; instance < 5; ++instance) {
      auto a = leaf(random_matrix(5, 8, rng));
      auto b = leaf(random_matrix(5, 8, rng));
      std::vector<TensorD> inputs{a, b};
      if (mode != FusionMode::Addition) {
        for (auto& p : params) inputs.push_back(p.tensor());
      }
      const MatrixD probe = random_matrix(5, 8, rng);
      CHECK(gradient_error([&] { return project(selective_fuse(a, b, mode, se), probe); }, inputs) < 1e-4);
    }
  }
}

TEST_CASE("dual loss examples and gradient flow") {
  RandomState rng(12);
  const Box3D gt(Vector3d::Zero(), Vector3d(0.8, 1.6, 1), 0.1);
  const Points seeds = slab_points(16, rng, 1.0, 0.3);
  const Points cells = kSmall.cell_centers(0.0);
  const auto tp = assign_targets<double>(seeds, gt, Box3D());
  const auto tb = assign_targets<double>(cells, gt, Box3D());
  auto perfect = [](const TargetAssignment<double>& t) {
    return TrackPrediction<double>{TensorD(MatrixD(t.cls_target.array() * 40.0 - 20.0)), TensorD(t.reg_target)};
  };
  CHECK(dual_loss(perfect(tp), perfect(tb), tp, tb).item() < 1e-3);

  ModelConfig defaults;
  CHECK(defaults.alpha == 100.0);
  CHECK(defaults.beta == 2.0);

  CoarseHead<double> ph("head", 8, rng), bh("bev.head", 8, rng);
  const TensorD pf(random_matrix(16, 8, rng)), bf(random_matrix(64, 8, rng));
  backward(dual_loss(ph(pf), bh(bf), tp, tb));
  ParameterList<double> params;
  ph.collect(params);
  bh.collect(params);
  for (const auto& p : params) CHECK(p.tensor().grad().norm() > 0.0);

  for (int instance = 0; instance < 5; ++instance) {
    auto pc = leaf(random_matrix(16, 1, rng, -2, 2));
    auto pr = leaf(random_matrix(16, 4, rng));
    auto bc = leaf(random_matrix(64, 1, rng, -2, 2));
    auto br = leaf(random_matrix(64, 4, rng));
    auto loss = [&] { return dual_loss<double>({pc, pr}, {bc, br}, tp, tb, 100.0, 2.0); };
    CHECK(gradient_error(loss, {pc, pr, bc, br}) < 1e-4);
  }
}

TEST_CASE("gradient through pillarize, encode, match, backbone and fuse") {
  RandomState rng(13);
  const Index c = 8;
  auto enc = leaf(random_matrix(11, c, rng));
  PrtWeights<double> prt("bev.prt", c, 1, {}, rng);
  BevBackbone<double> backbone("bev.backbone", c, {8}, rng);
  SeWeights<double> se("fuse.se", 8, 2, rng);
  Points cloud(4, 3);
  cloud << -0.4, 0.2, 0.1, 0.5, -0.3, -0.2, 0.1, 0.1, 0.4, -0.8, -0.7, 0.0;
  const Points seeds = slab_points(6, rng, 0.9, 0.3);
  auto point_feat = leaf(random_matrix(6, 8, rng));
  std::vector<TensorD> inputs{enc, point_feat};
  ParameterList<double> params;
  prt.collect(params);
  backbone.collect(params);
  se.collect(params);
  for (auto& p : params) inputs.push_back(p.tensor());
  const MatrixD probe = random_matrix(6, 8, rng);
  auto loss = [&] {
    const auto grid = encode_pillars(pillarize(cloud, kSmall, Vector3d(1, 2, 1)), enc);
    const auto matched = bev_match(grid, grid, prt);
    const auto feat = backbone(matched);
    return project(selective_fuse(point_feat, bev_to_point(feat, seeds), FusionMode::PointWise, se), probe);
  };
  CHECK(gradient_error(loss, inputs) < 1e-3);
}

TEST_CASE("fused model with a saturated gate reduces to the point tracker bit-exactly") {
  ModelConfig base;
  base.backbone.widths = {16, 16, 32};
  base.backbone.max_neighbors = 8;
  base.bev = BevGeometry::from_range(-2.4, 2.4, -2.4, 2.4, -1.5, 1.5, 0.3);  // 16 x 16
  base.bev_channels = 8;
  base.bev_widths = {8, 8};
  base.se_reduction = 4;

  ModelConfig plus = base;
  plus.kind = ModelKind::PttrPlusPlus;
  plus.fusion = FusionMode::PointWise;
  plus.fusion_branch = FusionBranch::Point;

  RandomState init_a(1), init_b(2);
  TrackerNet<float> pttr(base, init_a);
  TrackerNet<float> fused(plus, init_b);
  auto src = pttr.parameters();
  auto dst = fused.parameters();
  for (auto& p : dst) {
    if (const auto* q = src.find(p.name())) p.tensor().mutable_value() = q->tensor().value();
  }
  fused.fusion_weights().up.weight().tensor().mutable_value().setZero();
  fused.fusion_weights().up.bias().tensor().mutable_value().setConstant(100.0f);

  RandomState data(3);
  for (int trial = 0; trial < 3; ++trial) {
    TrackInput in{slab_points(200, data, 1.0, 0.7), slab_points(400, data, 2.2, 0.7), Vector3d(1.0, 2.0, 1.4)};
    RandomState ra(10 + trial), rb(10 + trial);
    const auto oa = pttr.forward(in, ra);
    const auto ob = fused.forward(in, rb);
    CHECK(oa.seeds == ob.seeds);
    CHECK(oa.coarse->cls.value() == ob.coarse->cls.value());
    CHECK(oa.point_final().reg.value() == ob.point_final().reg.value());
    const Box3D ref(Vector3d::Zero(), in.box_size, 0.0);
    CHECK(pttr.decode(oa, ref) == fused.decode(ob, ref));
  }
}
