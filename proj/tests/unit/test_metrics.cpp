#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "s2r/embedder.hpp"
#include "s2r/errors.hpp"
#include "s2r/evaluation.hpp"
#include "s2r/metrics.hpp"
#include "s2r/segmenter.hpp"
#include "s2r/toy_domains.hpp"
#include "support.hpp"

using namespace s2r;

namespace {

FeatureSet fs_of(const torch::Tensor& t, const std::string& id = "test") { return {t.to(torch::kFloat64), id}; }

// FID for D = 2 by scalar arithmetic: for 2×2 PSD matrices the eigenvalues of
// A·B are non-negative and Tr((A B)^{1/2}) = sqrt(tr(AB) + 2 sqrt(det A det B)).
double fid_2d_oracle(const torch::Tensor& xa, const torch::Tensor& xb) {
    auto stats = [](const torch::Tensor& x, double mu[2], double s[2][2]) {
        const auto n = x.size(0);
        mu[0] = mu[1] = 0.0;
        for (std::int64_t i = 0; i < n; ++i)
            for (int d = 0; d < 2; ++d) mu[d] += x[i][d].item<double>() / static_cast<double>(n);
        for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q) {
                double acc = 0.0;
                for (std::int64_t i = 0; i < n; ++i)
                    acc += (x[i][p].item<double>() - mu[p]) * (x[i][q].item<double>() - mu[q]);
                s[p][q] = acc / static_cast<double>(n - 1);
            }
    };
    double ma[2], mb[2], a[2][2], b[2][2];
    stats(xa, ma, a);
    stats(xb, mb, b);
    const double tr_ab = a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1];
    const double det_a = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    const double det_b = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    const double tr_sqrt = std::sqrt(tr_ab + 2.0 * std::sqrt(det_a * det_b));
    const double dm = (ma[0] - mb[0]) * (ma[0] - mb[0]) + (ma[1] - mb[1]) * (ma[1] - mb[1]);
    return dm + a[0][0] + a[1][1] + b[0][0] + b[1][1] - 2.0 * tr_sqrt;
}

// Unbiased MMD² with the cubic kernel, by explicit double sums.
double mmd_oracle(const torch::Tensor& x, const torch::Tensor& y) {
    const auto m = x.size(0), n = y.size(0);
    const double d = static_cast<double>(x.size(1));
    auto k = [&](const torch::Tensor& p, const torch::Tensor& q) {
        double dot = 0.0;
        for (std::int64_t c = 0; c < p.size(0); ++c) dot += p[c].item<double>() * q[c].item<double>();
        return std::pow(dot / d + 1.0, 3);
    };
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < m; ++j)
            if (i != j) sxx += k(x[i], x[j]);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            if (i != j) syy += k(y[i], y[j]);
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) sxy += k(x[i], y[j]);
    return sxx / static_cast<double>(m * (m - 1)) + syy / static_cast<double>(n * (n - 1)) -
           2.0 * sxy / static_cast<double>(m * n);
}

struct Miou {
    std::vector<std::vector<std::int64_t>> cm;
    double miou;
};

Miou miou_oracle(const torch::Tensor& pred, const torch::Tensor& gt, int c) {
    Miou r{std::vector<std::vector<std::int64_t>>(c, std::vector<std::int64_t>(c, 0)), 0.0};
    const auto p = pred.flatten().contiguous(), g = gt.flatten().contiguous();
    for (std::int64_t i = 0; i < p.numel(); ++i) ++r.cm[g[i].item<std::int64_t>()][p[i].item<std::int64_t>()];
    double sum = 0.0;
    int present = 0;
    for (int k = 0; k < c; ++k) {
        std::int64_t tp = r.cm[k][k], fp = 0, fn = 0;
        for (int j = 0; j < c; ++j)
            if (j != k) {
                fn += r.cm[k][j];
                fp += r.cm[j][k];
            }
        if (tp + fp + fn == 0) continue;
        sum += static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
        ++present;
    }
    r.miou = present ? sum / present : 0.0;
    return r;
}

}  // namespace

TEST(Fid, IdentityAndSymmetry) {
    fixtures::Rand rnd(1);
    const auto a = fs_of(rnd.normal({200, 16}));
    const auto b = fs_of(rnd.normal({150, 16}) * 1.3 + 0.2);
    EXPECT_LT(std::abs(fid(a, a)), 1e-6);
    EXPECT_NEAR(fid(a, b), fid(b, a), 1e-8);
    EXPECT_GE(fid(a, b), -1e-6);
}

TEST(Fid, TwoDimensionalOracle) {
    fixtures::Rand rnd(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto mix = rnd.normal({2, 2}, torch::kFloat64);
        const auto xa = rnd.normal({40, 2}, torch::kFloat64).mm(mix);
        const auto xb = rnd.normal({30, 2}, torch::kFloat64) * rnd.uniform(0.5, 2.0) + rnd.uniform(-1, 1);
        EXPECT_NEAR(fid(fs_of(xa), fs_of(xb)), fid_2d_oracle(xa, xb), 1e-8);
    }
}

TEST(Fid, GaussianAnalytic) {
    fixtures::Rand rnd(3);
    const auto mu = torch::tensor({0.5, -0.3, 0.8, 0.0, 0.2, -0.6, 0.4, 0.1}, torch::kFloat64);
    const auto a = fs_of(rnd.normal({5000, 8}, torch::kFloat64));
    const auto b = fs_of(rnd.normal({5000, 8}, torch::kFloat64) + mu);
    const double expected = mu.pow(2).sum().item<double>();
    EXPECT_NEAR(fid(a, b), expected, 0.05 * expected);
}

TEST(Fid, Errors) {
    fixtures::Rand rnd(4);
    EXPECT_THROW(fid(fs_of(rnd.normal({10, 4}), "x"), fs_of(rnd.normal({10, 4}), "y")), ArgumentError);
    EXPECT_THROW(fid(fs_of(rnd.normal({1, 4})), fs_of(rnd.normal({10, 4}))), ArgumentError);
    EXPECT_THROW(fid(fs_of(rnd.normal({10, 4})), fs_of(rnd.normal({10, 5}))), ShapeError);
}

TEST(Kid, ThreePointBruteForce) {
    fixtures::Rand rnd(5);
    const auto x = rnd.normal({3, 4}, torch::kFloat64);
    const auto y = rnd.normal({3, 4}, torch::kFloat64) + 0.5;
    EXPECT_NEAR(kid(fs_of(x), fs_of(x), 3, 1).mean, mmd_oracle(x, x), 1e-10);
    EXPECT_NEAR(kid(fs_of(x), fs_of(y), 3, 1).mean, mmd_oracle(x, y), 1e-10);
    EXPECT_NEAR(mmd2_unbiased(x, y), mmd_oracle(x, y), 1e-10);
}

TEST(Kid, ScalingMatchesOracle) {
    fixtures::Rand rnd(6);
    const auto x = rnd.normal({6, 5}, torch::kFloat64);
    const auto y = rnd.normal({5, 5}, torch::kFloat64);
    for (double c : {0.5, 2.0, 3.0}) EXPECT_NEAR(mmd2_unbiased(c * x, c * y), mmd_oracle(c * x, c * y), 1e-9);
}

TEST(Kid, UnbiasedAtEquality) {
    fixtures::Rand rnd(7);
    std::vector<double> values;
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = fs_of(rnd.normal({60, 8}));
        const auto b = fs_of(rnd.normal({60, 8}));
        values.push_back(kid(a, b, 30, 5, static_cast<std::uint64_t>(trial)).mean);
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
    EXPECT_LT(std::abs(mean), 3.0 * se);
}

TEST(Kid, Errors) {
    fixtures::Rand rnd(8);
    const auto a = fs_of(rnd.normal({10, 4}));
    EXPECT_THROW(kid(a, a, 11, 1), ArgumentError);
    EXPECT_THROW(kid(a, a, 1, 1), ArgumentError);
    EXPECT_THROW(kid(a, fs_of(rnd.normal({10, 4}), "other"), 5, 1), ArgumentError);
}

TEST(Miou, PerfectAndDisjoint) {
    fixtures::Rand rnd(9);
    const auto gt = rnd.ids({2, 8, 8}, 4);
    EXPECT_DOUBLE_EQ(miou(gt, gt, 4).miou, 1.0);
    const auto a = torch::tensor({0, 0, 1, 1}, torch::kLong);
    const auto r = miou(1 - a, a, 2);
    EXPECT_DOUBLE_EQ(r.miou, 0.0);
    EXPECT_DOUBLE_EQ(r.per_class_iou[0], 0.0);
}

TEST(Miou, FourByFourTwoClassCase) {
    // TP0 = 6, FN0 = 1, FP0 = 2, TP1 = 7.
    const auto gt = torch::tensor({0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1}, torch::kLong).view({4, 4});
    const auto pred = torch::tensor({0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1}, torch::kLong).view({4, 4});
    const auto r = miou(pred, gt, 2);
    const auto o = miou_oracle(pred, gt, 2);
    EXPECT_EQ(o.cm[0][0], 6);
    EXPECT_EQ(o.cm[0][1], 1);
    EXPECT_EQ(o.cm[1][0], 2);
    EXPECT_DOUBLE_EQ(r.per_class_iou[0], 6.0 / 9.0);
    EXPECT_DOUBLE_EQ(r.per_class_iou[1], 7.0 / 10.0);
    EXPECT_DOUBLE_EQ(r.miou, o.miou);
}

TEST(Miou, RandomInstancesMatchBruteForceExactly) {
    fixtures::Rand rnd(10);
    for (int trial = 0; trial < 20; ++trial) {
        const int c = static_cast<int>(rnd.integer(2, 6));
        const std::vector<std::int64_t> shape{rnd.integer(1, 3), rnd.integer(1, 7), rnd.integer(1, 7)};
        const auto gt = rnd.ids(shape, c);
        const auto pred = rnd.ids(shape, c);
        const auto cm = confusion_matrix(pred, gt, c);
        const auto o = miou_oracle(pred, gt, c);
        for (int i = 0; i < c; ++i)
            for (int j = 0; j < c; ++j) EXPECT_EQ(cm[i][j].item<std::int64_t>(), o.cm[i][j]);
        EXPECT_EQ(miou(pred, gt, c).miou, o.miou);
    }
}

TEST(Miou, AbsentClassesExcludedAndPermutationInvariant) {
    fixtures::Rand rnd(11);
    const auto gt = rnd.ids({4, 6}, 3);
    const auto pred = rnd.ids({4, 6}, 3);
    const auto r = miou(pred, gt, 5);  // classes 3 and 4 never occur
    EXPECT_EQ(r.classes_present, 3);
    EXPECT_TRUE(std::isnan(r.per_class_iou[4]));
    EXPECT_DOUBLE_EQ(r.miou, miou(pred, gt, 3).miou);

    const auto perm = torch::tensor({2, 0, 4, 1, 3}, torch::kLong);
    EXPECT_NEAR(miou(perm.index({pred}), perm.index({gt}), 5).miou, r.miou, 1e-15);
}

TEST(Miou, Errors) {
    EXPECT_THROW(miou(torch::zeros({2, 3}, torch::kLong), torch::zeros({3, 2}, torch::kLong), 2), ShapeError);
    EXPECT_THROW(miou(torch::full({2, 2}, 5, torch::kLong), torch::zeros({2, 2}, torch::kLong), 2), OutOfRangeError);
}

TEST(Embedder, RandomConvIsSeededAndDeterministic) {
    RandomConvEmbedder a(0), b(0), c(1);
    fixtures::Rand rnd(12);
    const auto x = rnd.normal({5, 3, 32, 64}).clamp(-1, 1);
    const auto fa = a.embed(x, 2);
    EXPECT_EQ(fa.features.sizes(), (std::vector<std::int64_t>{5, 64}));
    EXPECT_EQ(fa.features.scalar_type(), torch::kFloat64);
    EXPECT_TRUE(torch::equal(fa.features, b.embed(x, 2).features));
    EXPECT_TRUE(torch::allclose(fa.features, b.embed(x, 3).features, 1e-5, 1e-6));
    EXPECT_EQ(fa.embedder_id, b.id());
    EXPECT_NE(fa.embedder_id, c.id());
    EXPECT_THROW(fid(fa, c.embed(x)), ArgumentError);
    EXPECT_THROW(make_embedder("inception", "", 0), ConfigError);
    EXPECT_THROW(make_embedder("torchscript", "", 0), ConfigError);
}

TEST(ColorOracleSegmenter, ExactOnFlatRenderingsAndGoodOnRealToy) {
    const auto toy = make_toy_domains(0, 8, 40, 5, {64, 128});
    ColorOracleSegmenter seg(toy.palette);
    auto [syn, syn_ids] = toy.synthetic.batch({0, 1, 2, 3, 4, 5, 6, 7});
    // Without blur flat renderings are recovered exactly; the blur only costs boundary pixels.
    EXPECT_DOUBLE_EQ(miou(ColorOracleSegmenter(toy.palette, 1).predict(syn), *syn_ids, 5).miou, 1.0);
    EXPECT_GE(miou(seg.predict(syn), *syn_ids, 5).miou, 0.9);
    std::vector<std::int64_t> idx(40);
    std::iota(idx.begin(), idx.end(), 0);
    auto [real, real_ids] = toy.real_labeled.batch(idx);
    const auto pred = seg.predict(real);
    EXPECT_EQ(pred.sizes(), real_ids->sizes());
    EXPECT_GE(miou(pred, *real_ids, 5).miou, 0.6);
    EXPECT_EQ(make_segmenter("none", "", toy.palette), nullptr);
    EXPECT_EQ(make_segmenter("torchscript", "", toy.palette), nullptr);
    EXPECT_THROW(make_segmenter("drn", "", toy.palette), ConfigError);
}

TEST(EvaluateSplit, ToyContractAndDeterminism) {
    const auto cfg = fixtures::small_toy_config();
    const auto data = resolve_data(cfg.data);
    torch::manual_seed(0);
    Generator g{cfg.generator};
    g->eval();
    RandomConvEmbedder emb(0);
    ColorOracleSegmenter seg(data.palette);
    auto opts = eval_options_for(cfg);
    const auto splits = standard_splits(data, 3);
    ASSERT_EQ(splits.size(), 2u);
    EXPECT_EQ(splits[0].name, "split1");
    EXPECT_EQ(splits[1].name, "split2");
    EXPECT_EQ(splits[1].labels.size(), cfg.data.test_count);

    const auto a = evaluate_split(g, splits[1], emb, &seg, data.palette, opts);
    EXPECT_EQ(a.report.num_generated, cfg.data.test_count);
    EXPECT_EQ(a.report.num_reference, cfg.data.toy_real);
    EXPECT_TRUE(std::isfinite(a.report.fid));
    EXPECT_TRUE(std::isfinite(a.report.kid.mean));
    ASSERT_TRUE(a.report.miou.has_value());
    EXPECT_EQ(a.report.kid_subset_size, std::min<std::int64_t>(cfg.data.test_count, cfg.data.toy_real));
    EXPECT_EQ(a.generated.sizes(), (std::vector<std::int64_t>{cfg.data.test_count, 3, 32, 64}));

    const auto b = evaluate_split(g, splits[1], emb, &seg, data.palette, opts);
    EXPECT_EQ(a.report.to_json(), b.report.to_json());
    const auto c = evaluate_split(g, standard_splits(data, 4)[1], emb, &seg, data.palette, opts);
    EXPECT_NE(a.report.fid, c.report.fid);

    const auto partial = evaluate_split(g, splits[1], emb, nullptr, data.palette, opts);
    EXPECT_FALSE(partial.report.miou.has_value());
    EXPECT_NE(partial.report.to_json().find("miou_omitted"), std::string::npos);
    EXPECT_EQ(partial.report.fid, a.report.fid);
    EXPECT_NE(a.report.to_table().find("mIoU"), std::string::npos);

    const auto dir = fixtures::temp_dir("report");
    write_report(a, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "split2.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "split2.txt"));
    EXPECT_TRUE(std::filesystem::exists(dir / "split2_contact_sheet.png"));
    std::filesystem::remove_all(dir);
}
