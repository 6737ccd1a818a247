#include <set>

#include <gtest/gtest.h>

#include "s2r/dataset.hpp"
#include "s2r/errors.hpp"
#include "s2r/image_io.hpp"
#include "s2r/layout.hpp"
#include "s2r/palette.hpp"
#include "s2r/toy_domains.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace s2r;

TEST(OneHot, SmallExample) {
    const auto ids = torch::tensor({0, 1, 1, 2}, torch::kLong).view({2, 2});
    const auto oh = one_hot_encode(ids, 3);
    ASSERT_EQ(oh.sizes(), (std::vector<std::int64_t>{3, 2, 2}));
    EXPECT_TRUE(torch::equal(oh[0], torch::tensor({1.f, 0.f, 0.f, 0.f}).view({2, 2})));
    EXPECT_TRUE(torch::equal(oh[1], torch::tensor({0.f, 1.f, 1.f, 0.f}).view({2, 2})));
    EXPECT_TRUE(torch::equal(oh[2], torch::tensor({0.f, 0.f, 0.f, 1.f}).view({2, 2})));
}

TEST(OneHot, ConstantZero) {
    const auto oh = one_hot_encode(torch::zeros({4, 5}, torch::kLong), 2);
    EXPECT_TRUE(torch::all(oh[0] == 1).item<bool>());
    EXPECT_TRUE(torch::all(oh[1] == 0).item<bool>());
}

TEST(OneHot, PixelSumsAndArgmaxRoundTrip) {
    fixtures::Rand rnd(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int c = static_cast<int>(rnd.integer(2, 34));
        const auto ids = rnd.ids({rnd.integer(1, 3), rnd.integer(1, 9), rnd.integer(1, 9)}, c);
        const auto oh = one_hot_encode(ids, c);
        // Brute-force per-pixel check.
        const auto sums = oh.sum(1);
        EXPECT_TRUE(torch::all(sums == 1).item<bool>());
        EXPECT_TRUE(torch::equal(argmax_ids(oh), ids));
    }
}

TEST(OneHot, OutOfRangeNamesPixel) {
    auto ids = torch::zeros({3, 4}, torch::kLong);
    ids[2][1] = 7;
    try {
        one_hot_encode(ids, 5);
        FAIL() << "expected OutOfRangeError";
    } catch (const OutOfRangeError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("7"), std::string::npos);
        EXPECT_NE(msg.find("2"), std::string::npos);
    }
    ids[2][1] = -1;
    EXPECT_THROW(one_hot_encode(ids, 5), OutOfRangeError);
}

TEST(Palette, Cityscapes34AndToy) {
    EXPECT_EQ(ClassPalette::cityscapes34().num_classes(), 34);
    EXPECT_EQ(ClassPalette::toy(5).num_classes(), 5);
    EXPECT_THROW(ClassPalette::toy(9), Error);
    EXPECT_THROW(ClassPalette::toy(1), Error);
}

namespace {

// Writes n paired samples (image + label) with per-sample constant ids.
fs::path write_pairs(const fs::path& root, int n, int num_classes, bool labels = true) {
    fs::create_directories(root / "images");
    if (labels) fs::create_directories(root / "labels");
    for (int i = 0; i < n; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03d.png", i);
        write_rgb_png(root / "images" / name, torch::zeros({3, 16, 32}).uniform_(-1, 1));
        if (labels) write_label_png(root / "labels" / name, torch::full({16, 32}, i % num_classes, torch::kLong));
    }
    return root;
}

}  // namespace

TEST(LoadDataset, PairedAndUnpaired) {
    const auto dir = fixtures::temp_dir("load");
    const auto palette = ClassPalette::toy(5);
    auto paired = load_dataset(write_pairs(dir / "syn", 10, 5), DatasetKind::PairedSynthetic, palette);
    EXPECT_EQ(paired.size(), 10);
    EXPECT_EQ(paired.kind(), DatasetKind::PairedSynthetic);
    EXPECT_EQ(paired.name(0), "frame_000");
    EXPECT_EQ(paired.name(9), "frame_009");
    const auto s = paired.sample(3);
    ASSERT_TRUE(s.ids.has_value());
    EXPECT_EQ(s.ids->sizes(), (std::vector<std::int64_t>{16, 32}));
    EXPECT_EQ(s.image.sizes(), (std::vector<std::int64_t>{3, 16, 32}));
    EXPECT_EQ((*s.ids)[0][0].item<std::int64_t>(), 3);

    auto real = load_dataset(write_pairs(dir / "real", 7, 5, false), DatasetKind::UnpairedReal, palette);
    EXPECT_EQ(real.size(), 7);
    EXPECT_EQ(real.kind(), DatasetKind::UnpairedReal);
    EXPECT_FALSE(real.sample(0).ids.has_value());
    fs::remove_all(dir);
}

TEST(LoadDataset, MissingLabelIsPairingError) {
    const auto dir = fixtures::temp_dir("pairing");
    write_pairs(dir, 4, 5);
    fs::remove(dir / "labels" / "frame_002.png");
    EXPECT_THROW(load_dataset(dir, DatasetKind::PairedSynthetic, ClassPalette::toy(5)), PairingError);
    fs::remove_all(dir);
}

TEST(LoadDataset, UnknownClassIsPaletteError) {
    const auto dir = fixtures::temp_dir("palette");
    write_pairs(dir, 4, 5);
    write_label_png(dir / "labels" / "frame_001.png", torch::full({16, 32}, 9, torch::kLong));
    EXPECT_THROW(load_dataset(dir, DatasetKind::PairedSynthetic, ClassPalette::toy(5)), PaletteError);
    fs::remove_all(dir);
}

TEST(LoadDataset, ResizeOnLoad) {
    const auto dir = fixtures::temp_dir("resize");
    write_pairs(dir, 2, 5);
    LoadOptions opts;
    opts.target_size = ImageSize{32, 64};
    auto h = load_dataset(dir, DatasetKind::PairedSynthetic, ClassPalette::toy(5), opts);
    const auto s = h.sample(1);
    EXPECT_EQ(s.image.sizes(), (std::vector<std::int64_t>{3, 32, 64}));
    EXPECT_EQ(s.ids->sizes(), (std::vector<std::int64_t>{32, 64}));
    fs::remove_all(dir);
}

namespace {

DatasetHandle numbered_memory_dataset(int n) {
    std::vector<Sample> samples;
    for (int i = 0; i < n; ++i)
        samples.push_back({"s" + std::to_string(100 + i), torch::full({3, 16, 16}, 0.0f),
                           torch::full({16, 16}, i % 2, torch::kLong)});
    return DatasetHandle(DatasetKind::PairedSynthetic, make_memory_source(std::move(samples)));
}

}  // namespace

TEST(SplitSynthetic, LastSamplesAreTest) {
    auto h = numbered_memory_dataset(10);
    auto [train, test] = split_synthetic(h, 2);
    EXPECT_EQ(train.size(), 8);
    ASSERT_EQ(test.size(), 2);
    EXPECT_EQ(test.name(0), h.name(8));
    EXPECT_EQ(test.name(1), h.name(9));
    std::set<std::string> names;
    for (std::int64_t i = 0; i < train.size(); ++i) names.insert(train.name(i));
    for (std::int64_t i = 0; i < test.size(); ++i) EXPECT_FALSE(names.count(test.name(i)));
    EXPECT_THROW(split_synthetic(h, 10), ArgumentError);
    EXPECT_THROW(split_synthetic(h, 11), ArgumentError);
}

TEST(SplitSynthetic, PaperScaleArithmetic) {
    std::vector<Sample> samples(7000, Sample{"x", torch::zeros({3, 16, 16}), torch::zeros({16, 16}, torch::kLong)});
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].name = std::to_string(i);
    DatasetHandle h(DatasetKind::PairedSynthetic, make_memory_source(std::move(samples)));
    auto [train, test] = split_synthetic(h, 5000);
    EXPECT_EQ(train.size(), 2000);
    EXPECT_EQ(test.size(), 5000);
}

TEST(ResizeSample, SingleClassStaysSingleClass) {
    const auto ids = torch::full({48, 96}, 3, torch::kLong);
    auto [img, out] = resize_sample(torch::zeros({3, 48, 96}), ids, {32, 64});
    EXPECT_EQ(img.sizes(), (std::vector<std::int64_t>{3, 32, 64}));
    EXPECT_TRUE(torch::all(out == 3).item<bool>());
}

TEST(ResizeSample, NeverIntroducesNewIds) {
    fixtures::Rand rnd(5);
    for (int trial = 0; trial < 10; ++trial) {
        // Checkerboard of two random ids, plus a random id map.
        const auto a = rnd.integer(0, 33), b = rnd.integer(0, 33);
        auto checker = (torch::arange(64).view({8, 8}) + torch::arange(8).view({8, 1})) % 2;
        checker = torch::where(checker == 0, torch::full_like(checker, a), torch::full_like(checker, b));
        checker = checker.repeat({4, 8});  // 32×64
        const auto down = resize_labels(checker, {16, 32});
        for (auto v : std::vector<std::int64_t>(down.data_ptr<std::int64_t>(), down.data_ptr<std::int64_t>() + down.numel()))
            EXPECT_TRUE(v == a || v == b);

        const auto ids = rnd.ids({32, 64}, 34);
        std::set<std::int64_t> in(ids.data_ptr<std::int64_t>(), ids.data_ptr<std::int64_t>() + ids.numel());
        const auto up = resize_labels(ids, {48, 80});
        for (std::int64_t i = 0; i < up.numel(); ++i) EXPECT_TRUE(in.count(up.data_ptr<std::int64_t>()[i]));
    }
}

TEST(ResizeSample, RejectsNonDivisibleTarget) {
    EXPECT_THROW(resize_sample(torch::zeros({3, 32, 32}), torch::zeros({32, 32}, torch::kLong), {30, 32}),
                 ArgumentError);
    EXPECT_THROW(resize_labels(torch::zeros({32, 32}, torch::kLong), {32, 0}), ArgumentError);
}

TEST(ToyDomains, SizesAndDeterminism) {
    const auto a = make_toy_domains(0, 200, 200, 5, {64, 128});
    EXPECT_EQ(a.synthetic.size(), 200);
    EXPECT_EQ(a.real.size(), 200);
    EXPECT_EQ(a.synthetic.kind(), DatasetKind::PairedSynthetic);
    EXPECT_EQ(a.real.kind(), DatasetKind::UnpairedReal);
    const auto b = make_toy_domains(0, 200, 200, 5, {64, 128});
    for (std::int64_t i : {0, 57, 199}) {
        EXPECT_TRUE(torch::equal(a.synthetic.sample(i).image, b.synthetic.sample(i).image));
        EXPECT_TRUE(torch::equal(*a.synthetic.sample(i).ids, *b.synthetic.sample(i).ids));
        EXPECT_TRUE(torch::equal(a.real.sample(i).image, b.real.sample(i).image));
    }
    const auto c = make_toy_domains(1, 4, 4, 5, {64, 128});
    EXPECT_FALSE(torch::equal(a.synthetic.sample(0).image, c.synthetic.sample(0).image));
}

TEST(ToyDomains, ClassFrequencyShift) {
    for (int classes : {5, 8}) {
        const auto t = make_toy_domains(0, 200, 200, classes, {64, 128});
        const auto p = class_histogram(t.synthetic, classes);
        const auto q = class_histogram(t.real_labeled, classes);
        EXPECT_NEAR(p.sum().item<double>(), 1.0, 1e-9);
        EXPECT_GE(total_variation(p, q), 0.10) << "classes=" << classes;
    }
}

TEST(ToyDomains, SyntheticIsFlatPaletteRendering) {
    const auto t = make_toy_domains(3, 5, 5, 5, {64, 128});
    for (std::int64_t i = 0; i < 5; ++i) {
        const auto s = t.synthetic.sample(i);
        EXPECT_TRUE(torch::allclose(s.image, render_flat(*s.ids, t.palette), 0.0, 1e-6));
        const auto r = t.real.sample(i).image;
        EXPECT_LE(r.max().item<float>(), 1.0f);
        EXPECT_GE(r.min().item<float>(), -1.0f);
    }
}

TEST(ToyDomains, PreconditionsChecked) {
    EXPECT_THROW(make_toy_domains(0, 0, 5, 5, {64, 128}), ArgumentError);
    EXPECT_THROW(make_toy_domains(0, 5, 5, 9, {64, 128}), ArgumentError);
    EXPECT_THROW(make_toy_domains(0, 5, 5, 5, {60, 128}), ArgumentError);
}

TEST(ToyDomains, WriteLoadRoundTrip) {
    const auto dir = fixtures::temp_dir("toyio");
    const auto t = make_toy_domains(2, 6, 3, 5, {32, 64});
    write_dataset(t.synthetic, dir / "synthetic");
    write_dataset(t.real, dir / "real");
    const auto syn = load_dataset(dir / "synthetic", DatasetKind::PairedSynthetic, t.palette);
    const auto real = load_dataset(dir / "real", DatasetKind::UnpairedReal, t.palette);
    ASSERT_EQ(syn.size(), 6);
    ASSERT_EQ(real.size(), 3);
    for (std::int64_t i = 0; i < 6; ++i) {
        EXPECT_EQ(syn.name(i), t.synthetic.name(i));
        EXPECT_TRUE(torch::equal(*syn.sample(i).ids, *t.synthetic.sample(i).ids));
        // 8-bit quantization bound.
        EXPECT_LE((syn.sample(i).image - t.synthetic.sample(i).image).abs().max().item<float>(), 1.0f / 127.0f);
    }
    fs::remove_all(dir);
}

TEST(DatasetHandle, BatchStacksSamples) {
    auto h = numbered_memory_dataset(5);
    auto [images, ids] = h.batch({4, 1, 2});
    EXPECT_EQ(images.sizes(), (std::vector<std::int64_t>{3, 3, 16, 16}));
    ASSERT_TRUE(ids.has_value());
    EXPECT_EQ((*ids)[0][0][0].item<std::int64_t>(), 0);
    EXPECT_EQ((*ids)[1][0][0].item<std::int64_t>(), 1);
    auto unpaired = h.as_kind(DatasetKind::UnpairedReal);
    EXPECT_FALSE(unpaired.batch({0}).second.has_value());
    EXPECT_THROW(h.sample(5), Error);
}
