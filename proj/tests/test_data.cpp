#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "haze/data/dataset.hpp"
#include "haze/data/png_io.hpp"
#include "haze/metrics/metrics.hpp"

using namespace haze;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<char> file_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("augment schedule") {
    AugmentSchedule s;
    s.p_start = 0.5;
    s.p_end = 0.1;
    SUBCASE("endpoints") {
        CHECK(s.probability(0, 10) == doctest::Approx(0.5));
        CHECK(s.probability(9, 10) == 0.1);
        CHECK(s.probability(999, 10) == 0.1);
    }
    SUBCASE("monotone non-increasing") {
        double prev = 1.1;
        for (int e = 0; e < 10; ++e) {
            const double p = s.probability(e, 10);
            CHECK(p <= prev);
            prev = p;
        }
    }
    SUBCASE("invalid ranges rejected") {
        AugmentSchedule bad;
        bad.p_start = 0.2;
        bad.p_end = 0.5;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad.p_start = 1.5;
        bad.p_end = 0.1;
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
}

TEST_CASE("atmospheric scattering model") {
    Tensor clear({3, 4, 4}, 0.3);
    Tensor depth({4, 4}, 0.8);
    std::array<double, 3> airlight{0.9, 0.85, 0.88};

    SUBCASE("beta = 0 reproduces the clear image exactly") {
        Tensor hazy = apply_atmospheric_scattering(clear, depth, 0.0, airlight);
        for (int64_t i = 0; i < hazy.numel(); ++i) CHECK(hazy(i) == clear(i));
    }
    SUBCASE("infinite optical depth converges to the airlight") {
        Tensor deep({4, 4}, 1e9);
        Tensor hazy = apply_atmospheric_scattering(clear, deep, 2.0, airlight);
        for (int64_t c = 0; c < 3; ++c)
            CHECK(hazy(c, 0, 0) == doctest::Approx(airlight[size_t(c)]).epsilon(1e-12));
    }
}

TEST_CASE("micro dataset generation") {
    TempDir dir("hazekit_micro_a");
    generate_micro_dataset(4, dir.path.string(), 7, 48);

    SUBCASE("loadable pairs with haze actually applied") {
        PairedDataset ds(dir.path.string());
        REQUIRE(ds.size() == 4);
        for (size_t i = 0; i < ds.size(); ++i) {
            auto [hazy, clear] = ds.load_pair(i);
            CHECK(hazy.same_shape(clear));
            CHECK(psnr(hazy, clear) < 99.0);
            for (int64_t j = 0; j < hazy.numel(); ++j) {
                CHECK(hazy(j) >= 0.0);
                CHECK(hazy(j) <= 1.0);
            }
        }
        CHECK(fs::exists(dir.path / "meta.json"));
    }
    SUBCASE("byte-identical across runs with the same seed") {
        TempDir dir2("hazekit_micro_b");
        generate_micro_dataset(4, dir2.path.string(), 7, 48);
        for (const char* sub : {"hazy", "clear"})
            for (const auto& entry : fs::directory_iterator(dir.path / sub)) {
                const auto other = dir2.path / sub / entry.path().filename();
                REQUIRE(fs::exists(other));
                CHECK(file_bytes(entry.path()) == file_bytes(other));
            }
        CHECK(file_bytes(dir.path / "meta.json") == file_bytes(dir2.path / "meta.json"));
    }
}

TEST_CASE("dataset integrity") {
    TempDir dir("hazekit_integrity");
    generate_micro_dataset(2, dir.path.string(), 3, 32);

    SUBCASE("well-formed dataset loads") {
        PairedDataset ds(dir.path.string());
        CHECK(ds.size() == 2);
    }
    SUBCASE("hazy file without a clear counterpart is named in the error") {
        fs::remove(dir.path / "clear" / "pair_001.png");
        try {
            PairedDataset ds(dir.path.string());
            FAIL("expected DataIntegrityError");
        } catch (const DataIntegrityError& e) {
            CHECK(std::string(e.what()).find("pair_001.png") != std::string::npos);
        }
    }
}

TEST_CASE("16-bit png roundtrip is lossless within 1/65535") {
    TempDir dir("hazekit_png16");
    const int W = 16, H = 8;
    std::vector<uint16_t> px(W * H);
    for (int i = 0; i < W * H; ++i) px[size_t(i)] = static_cast<uint16_t>((i * 4099) % 65536);
    const auto path = (dir.path / "g16.png").string();
    write_png_gray16(path, px.data(), W, H);
    Tensor img = read_png(path);
    REQUIRE(img.shape() == std::vector<int64_t>{3, H, W});
    for (int i = 0; i < W * H; ++i) {
        const double expected = px[size_t(i)] / 65535.0;
        CHECK(std::fabs(img(0 * W * H + i) - expected) <= 1.0 / 65535.0);
    }
}

TEST_CASE("random crop resize") {
    Rng rng(11);
    SUBCASE("pair receives the identical window") {
        Tensor img({3, 96, 128});
        for (int64_t i = 0; i < img.numel(); ++i) img(i) = (i % 977) / 977.0;
        auto [a, b] = random_crop_resize(img, img, rng, 32);
        CHECK(a.shape() == std::vector<int64_t>{3, 32, 32});
        for (int64_t i = 0; i < a.numel(); ++i) REQUIRE(a(i) == b(i));
    }
    SUBCASE("small input is resized up") {
        Tensor img({3, 20, 20}, 0.5);
        auto [a, b] = random_crop_resize(img, img, rng, 32);
        CHECK(a.shape() == std::vector<int64_t>{3, 32, 32});
        CHECK(b.shape() == std::vector<int64_t>{3, 32, 32});
    }
    SUBCASE("crop side stays within multiples of the target") {
        // 72x72 with target 32: only sides 32 and 64 are possible; outputs
        // are always target-sized
        Tensor img({3, 72, 72});
        for (int64_t i = 0; i < img.numel(); ++i) img(i) = (i % 31) / 31.0;
        for (int t = 0; t < 8; ++t) {
            auto [a, b] = random_crop_resize(img, img, rng, 32);
            CHECK(a.shape() == std::vector<int64_t>{3, 32, 32});
        }
    }
}

TEST_CASE("training item sampling") {
    TempDir dir("hazekit_sampling");
    generate_micro_dataset(2, dir.path.string(), 5, 16);
    PairedDataset ds(dir.path.string());
    AugmentSchedule schedule;
    schedule.p_start = 0.5;
    schedule.p_end = 0.1;
    HazySynthesizer synth = [](const Tensor& clear, const Tensor&, Rng& r) {
        Tensor out = clear.clone();
        const double shift = r.uniform(0.0, 0.2);
        for (int64_t i = 0; i < out.numel(); ++i) out(i) = std::min(1.0, out(i) + shift);
        return out;
    };

    SUBCASE("empirical synthesized fraction near p at epoch 0") {
        Rng rng(42);
        int synth_count = 0;
        const int draws = 10000;
        for (int i = 0; i < draws; ++i) {
            TrainingItem item = sample_training_item(0, 10, schedule, ds, &synth, 1, rng);
            if (item.synthesized) ++synth_count;
        }
        const double fraction = synth_count / static_cast<double>(draws);
        CHECK(fraction >= 0.48);
        CHECK(fraction <= 0.52);
    }
    SUBCASE("negative policy: real hazy first, synthesized fill at half weight") {
        Rng rng(7);
        TrainingItem item = sample_training_item(0, 10, schedule, ds, &synth, 4, rng);
        REQUIRE(item.negatives.size() == 4);
        REQUIRE(item.negative_weights.size() == 4);
        CHECK(item.negative_weights[0] == 1.0);
        for (size_t i = 1; i < 4; ++i) CHECK(item.negative_weights[i] == 0.5);
        auto [hazy, clear] = ds.load_pair(item.pair_index);
        for (int64_t i = 0; i < hazy.numel(); ++i) REQUIRE(item.negatives[0](i) == hazy(i));
    }
    SUBCASE("no synthesizer: single real negative, never synthesized") {
        Rng rng(7);
        TrainingItem item = sample_training_item(0, 10, schedule, ds, nullptr, 10, rng);
        CHECK_FALSE(item.synthesized);
        CHECK(item.negatives.size() == 1);
    }
    SUBCASE("fixed seed reproduces the sample sequence") {
        auto collect = [&]() {
            Rng rng(123);
            std::vector<double> probe;
            for (int i = 0; i < 20; ++i) {
                TrainingItem item = sample_training_item(0, 10, schedule, ds, &synth, 2, rng);
                probe.push_back(item.input(0));
                probe.push_back(static_cast<double>(item.pair_index));
                probe.push_back(item.synthesized ? 1.0 : 0.0);
            }
            return probe;
        };
        CHECK(collect() == collect());
    }
}
