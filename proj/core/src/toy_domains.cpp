#include "s2r/toy_domains.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include <opencv2/imgproc.hpp>

#include "s2r/errors.hpp"

namespace s2r {

namespace {

enum ToyClass : int { kSky = 0, kRoad, kBuilding, kVegetation, kCar, kSidewalk, kPerson, kPole };

struct SceneStyle {
    double horizon_lo, horizon_hi;  // fraction of image height
    int buildings_lo, buildings_hi;
    double building_height_lo, building_height_hi;  // fraction of height above horizon
    int trees_lo, trees_hi;
    int cars_lo, cars_hi;
    int people_lo, people_hi;
    int poles_lo, poles_hi;
};

// Game-like domain: open sky, sparse buildings.
constexpr SceneStyle kSyntheticStyle{0.42, 0.58, 1, 3, 0.10, 0.30, 0, 2, 1, 2, 0, 2, 0, 2};
// Photo-like domain: low horizon, dense buildings and vegetation.
constexpr SceneStyle kRealStyle{0.22, 0.34, 3, 6, 0.25, 0.60, 2, 5, 2, 4, 1, 3, 1, 3};

class Rng {
public:
    explicit Rng(std::seed_seq& seq) : engine_(seq) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

private:
    std::mt19937_64 engine_;
};

cv::Mat draw_scene(Rng& rng, const SceneStyle& st, int num_classes, int h, int w) {
    auto has = [&](ToyClass c) { return static_cast<int>(c) < num_classes; };
    cv::Mat ids(h, w, CV_8UC1, cv::Scalar(kSky));
    const int horizon = static_cast<int>(std::lround(rng.uniform(st.horizon_lo, st.horizon_hi) * h));
    const int ground = has(kSidewalk) ? kSidewalk : kRoad;
    cv::rectangle(ids, cv::Point(0, horizon), cv::Point(w - 1, h - 1), cv::Scalar(ground), cv::FILLED);
    if (has(kSidewalk)) {
        const double cx = rng.uniform(0.4, 0.6) * w;
        std::vector<cv::Point> road{{static_cast<int>(cx - 0.06 * w), horizon},
                                    {static_cast<int>(cx + 0.06 * w), horizon},
                                    {static_cast<int>(1.15 * w), h - 1},
                                    {static_cast<int>(-0.15 * w), h - 1}};
        cv::fillConvexPoly(ids, road, cv::Scalar(kRoad));
    }

    if (has(kBuilding)) {
        const int n = rng.integer(st.buildings_lo, st.buildings_hi);
        for (int i = 0; i < n; ++i) {
            const int bw = static_cast<int>(rng.uniform(0.10, 0.28) * w);
            const int x0 = static_cast<int>(rng.uniform(-0.1, 0.95) * w);
            const int top = std::max(0, horizon - static_cast<int>(rng.uniform(st.building_height_lo,
                                                                               st.building_height_hi) * h));
            const int bottom = horizon + static_cast<int>(0.04 * h);
            std::vector<cv::Point> poly{{x0, bottom}, {x0, top}, {x0 + bw, top + rng.integer(0, h / 16)},
                                        {x0 + bw, bottom}};
            cv::fillConvexPoly(ids, poly, cv::Scalar(kBuilding));
        }
    }
    if (has(kVegetation)) {
        const int n = rng.integer(st.trees_lo, st.trees_hi);
        for (int i = 0; i < n; ++i) {
            const cv::Point c(static_cast<int>(rng.uniform(0.0, 1.0) * w),
                              horizon - static_cast<int>(rng.uniform(0.0, 0.15) * h));
            const cv::Size axes(static_cast<int>(rng.uniform(0.04, 0.11) * w),
                                static_cast<int>(rng.uniform(0.08, 0.18) * h));
            cv::ellipse(ids, c, axes, 0.0, 0.0, 360.0, cv::Scalar(kVegetation), cv::FILLED);
        }
    }
    if (has(kPole)) {
        const int n = rng.integer(st.poles_lo, st.poles_hi);
        for (int i = 0; i < n; ++i) {
            const int x = static_cast<int>(rng.uniform(0.05, 0.95) * w);
            cv::rectangle(ids, cv::Point(x, std::max(0, horizon - static_cast<int>(0.3 * h))),
                          cv::Point(x + 1, horizon + static_cast<int>(0.12 * h)), cv::Scalar(kPole), cv::FILLED);
        }
    }
    if (has(kCar)) {
        const int n = rng.integer(st.cars_lo, st.cars_hi);
        for (int i = 0; i < n; ++i) {
            const double depth = rng.uniform(0.0, 1.0);  // 0 = near horizon, 1 = bottom
            const int cw = static_cast<int>((0.08 + 0.14 * depth) * w);
            const int ch = std::max(3, static_cast<int>(0.42 * cw * static_cast<double>(w) / (2.0 * h)));
            const int y1 = horizon + static_cast<int>((0.12 + 0.8 * depth) * (h - horizon));
            const int x0 = static_cast<int>(rng.uniform(0.0, 0.9) * w);
            cv::rectangle(ids, cv::Point(x0, std::max(0, y1 - ch)), cv::Point(x0 + cw, std::min(h - 1, y1)),
                          cv::Scalar(kCar), cv::FILLED);
            cv::rectangle(ids, cv::Point(x0 + cw / 5, std::max(0, y1 - ch - ch / 2)),
                          cv::Point(x0 + 4 * cw / 5, std::max(0, y1 - ch)), cv::Scalar(kCar), cv::FILLED);
        }
    }
    if (has(kPerson)) {
        const int n = rng.integer(st.people_lo, st.people_hi);
        for (int i = 0; i < n; ++i) {
            const int ph = std::max(4, static_cast<int>(rng.uniform(0.10, 0.2) * h));
            const int x = static_cast<int>(rng.uniform(0.0, 0.97) * w);
            const int y1 = horizon + static_cast<int>(rng.uniform(0.1, 0.5) * (h - horizon));
            cv::rectangle(ids, cv::Point(x, std::max(0, y1 - ph)), cv::Point(x + std::max(1, ph / 4), y1),
                          cv::Scalar(kPerson), cv::FILLED);
        }
    }
    return ids;
}

torch::Tensor ids_from_mat(const cv::Mat& m) {
    return torch::from_blob(m.data, {m.rows, m.cols}, torch::kUInt8).to(torch::kLong);
}

torch::Tensor palette_table(const ClassPalette& palette) {
    auto table = torch::empty({palette.num_classes(), 3}, torch::kFloat32);
    for (int c = 0; c < palette.num_classes(); ++c)
        for (int k = 0; k < 3; ++k) table[c][k] = palette.color(c)[static_cast<std::size_t>(k)] / 127.5f - 1.0f;
    return table;
}

// Shading, per-class texture and sensor noise on top of the flat palette colors.
torch::Tensor render_textured(const torch::Tensor& ids, const ClassPalette& palette, Rng& rng) {
    const auto h = ids.size(0), w = ids.size(1);
    auto img = render_flat(ids, palette);
    const double tilt = rng.uniform(-0.10, 0.10);
    const double phase = rng.uniform(0.0, 6.283);
    const double freq = rng.uniform(0.35, 0.6);
    auto ys = torch::linspace(-1.0, 1.0, h, torch::kFloat32).view({1, h, 1});
    auto xs = torch::arange(w, torch::kFloat32).view({1, 1, w});
    auto yi = torch::arange(h, torch::kFloat32).view({1, h, 1});
    auto shade = ys * static_cast<float>(tilt);
    auto stripes = torch::sin(xs * static_cast<float>(freq) + static_cast<float>(phase)) *
                   torch::sin(yi * static_cast<float>(freq) * 0.7f);
    auto building = (ids == kBuilding).to(torch::kFloat32).unsqueeze(0);
    auto vegetation = (ids == kVegetation).to(torch::kFloat32).unsqueeze(0);
    std::vector<float> noise(static_cast<std::size_t>(3 * h * w));
    for (auto& v : noise) v = static_cast<float>(rng.normal());
    auto grain = torch::from_blob(noise.data(), {3, h, w}, torch::kFloat32).clone();
    img = img + shade + 0.10f * stripes * building + 0.08f * grain * vegetation + 0.04f * grain;
    return img.clamp(-1.0, 1.0);
}

std::string sample_name(const char* prefix, std::int64_t i) {
    std::ostringstream s;
    s << prefix << std::setw(6) << std::setfill('0') << i;
    return s.str();
}

}  // namespace

torch::Tensor render_flat(const torch::Tensor& ids, const ClassPalette& palette) {
    require_shape(ids.dim() == 2, "render_flat: expected H×W ids");
    const auto table = palette_table(palette);
    return table.index_select(0, ids.flatten().to(torch::kLong))
        .view({ids.size(0), ids.size(1), 3})
        .permute({2, 0, 1})
        .contiguous();
}

ToyDomains make_toy_domains(std::uint64_t seed, std::int64_t n_synthetic, std::int64_t n_real, int num_classes,
                            ImageSize size) {
    require_arg(num_classes >= 2 && num_classes <= 8, "make_toy_domains: num_classes must be in [2, 8]");
    require_arg(n_synthetic >= 1 && n_real >= 1, "make_toy_domains: sample counts must be >= 1");
    require_arg(size.height > 0 && size.width > 0 && size.height % 16 == 0 && size.width % 16 == 0,
                "make_toy_domains: size must be positive and divisible by 16");
    auto palette = ClassPalette::toy(num_classes);
    const int h = static_cast<int>(size.height), w = static_cast<int>(size.width);
    const auto lo = static_cast<std::uint32_t>(seed & 0xffffffffu);
    const auto hi = static_cast<std::uint32_t>(seed >> 32);

    std::vector<Sample> syn;
    syn.reserve(static_cast<std::size_t>(n_synthetic));
    for (std::int64_t i = 0; i < n_synthetic; ++i) {
        std::seed_seq seq{lo, hi, 1u, static_cast<std::uint32_t>(i)};
        Rng rng(seq);
        auto ids = ids_from_mat(draw_scene(rng, kSyntheticStyle, num_classes, h, w));
        syn.push_back(Sample{sample_name("syn_", i), render_flat(ids, palette), ids});
    }
    std::vector<Sample> real;
    real.reserve(static_cast<std::size_t>(n_real));
    for (std::int64_t i = 0; i < n_real; ++i) {
        std::seed_seq seq{lo, hi, 2u, static_cast<std::uint32_t>(i)};
        Rng rng(seq);
        auto ids = ids_from_mat(draw_scene(rng, kRealStyle, num_classes, h, w));
        real.push_back(Sample{sample_name("real_", i), render_textured(ids, palette, rng), ids});
    }
    auto real_source = make_memory_source(std::move(real));
    return ToyDomains{palette, DatasetHandle(DatasetKind::PairedSynthetic, make_memory_source(std::move(syn))),
                      DatasetHandle(DatasetKind::UnpairedReal, real_source),
                      DatasetHandle(DatasetKind::PairedSynthetic, real_source)};
}

torch::Tensor class_histogram(const DatasetHandle& labeled, int num_classes) {
    require_arg(labeled.kind() == DatasetKind::PairedSynthetic, "class_histogram: dataset must carry labels");
    auto counts = torch::zeros({num_classes}, torch::kFloat64);
    for (std::int64_t i = 0; i < labeled.size(); ++i)
        counts += torch::bincount(labeled.sample(i).ids->flatten(), {}, num_classes).to(torch::kFloat64);
    return counts / counts.sum();
}

double total_variation(const torch::Tensor& p, const torch::Tensor& q) {
    require_shape(p.sizes() == q.sizes(), "total_variation: histogram sizes differ");
    return 0.5 * (p - q).abs().sum().item<double>();
}

}  // namespace s2r
