#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "bssnmr/io.hpp"

using namespace bssnmr;

namespace {

bool bit_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

LibraryFile tiny_library() {
  LibraryFile lib;
  lib.spec.cq_steps = 2;
  lib.spec.eta_steps = 2;
  lib.spec.diso_steps = 2;
  lib.spec.smoothing = {16, 64};
  lib.powder = PowderOptions{32, 16};
  lib.components = generate_library(lib.spec, lib.grid, 1, lib.powder);
  return lib;
}

}  // namespace

TEST(Base64, RoundTripIsBitExact) {
  Rng rng(3);
  for (int n : {0, 1, 2, 3, 7, 1024}) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.gaussian() * std::pow(10.0, rng.uniform() * 40 - 20);
    EXPECT_TRUE(bit_equal(v, decode_doubles(encode_doubles(v)))) << n;
  }
  const std::vector<double> special{0.0, -0.0, std::numeric_limits<double>::denorm_min(),
                                    std::numeric_limits<double>::max(), std::numeric_limits<double>::infinity()};
  EXPECT_TRUE(bit_equal(special, decode_doubles(encode_doubles(special))));
}

TEST(Base64, KnownEncoding) {
  // 1.0 = 00 00 00 00 00 00 F0 3F little-endian
  EXPECT_EQ(encode_doubles(std::vector<double>{1.0}), "AAAAAAAA8D8=");
}

TEST(Base64, RejectsGarbage) {
  EXPECT_THROW(decode_doubles("AAAA!AAA8D8="), std::invalid_argument);
  EXPECT_THROW(decode_doubles("AAAA"), std::invalid_argument);  // 3 bytes, not a whole double
}

TEST(Library, RoundTripAndChecksum) {
  const LibraryFile lib = tiny_library();
  ASSERT_EQ(lib.components.size(), 16u);
  const std::string text = to_json(lib).dump();
  const LibraryFile back = library_from_json(nlohmann::json::parse(text));
  ASSERT_EQ(back.components.size(), 16u);
  EXPECT_EQ(back.spec, lib.spec);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(back.components[i].id, lib.components[i].id);
    EXPECT_TRUE(bit_equal(back.components[i].intensity, lib.components[i].intensity));
  }
  EXPECT_EQ(library_checksum(back.components), library_checksum(lib.components));
  EXPECT_EQ(library_checksum(tiny_library().components), library_checksum(lib.components));
  EXPECT_EQ(to_json(back).dump(), text);
}

TEST(Library, TamperingIsDetected) {
  nlohmann::json j = to_json(tiny_library());
  LibraryFile lib = library_from_json(j);
  lib.components[3].intensity[100] = std::nextafter(lib.components[3].intensity[100], 1.0);
  EXPECT_NE(library_checksum(lib.components), j["manifest"]["checksum"].get<std::string>());
  j["components"][3]["intensity"] = encode_doubles(lib.components[3].intensity);
  EXPECT_THROW(library_from_json(j), std::invalid_argument);
}

TEST(GridSpec, BadFieldIsNamed) {
  try {
    grid_spec_from_json(nlohmann::json{{"cq_steps", "many"}});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("cq_steps"), std::string::npos) << e.what();
  }
  try {
    grid_spec_from_json(nlohmann::json{{"cq_stepz", 3}});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("cq_stepz"), std::string::npos) << e.what();
  }
  EXPECT_EQ(grid_spec_from_json(nlohmann::json::object()), LibraryGridSpec{});
}

TEST(Dataset, RoundTripIsBitExact) {
  const LibraryFile lib = tiny_library();
  DatasetFile f;
  f.pures = sample_components(lib.components, 3, 11);
  f.dataset = assemble_dataset(f.pures, IntensityModel::nutation, 12, 0.000316);
  f.has_provenance = true;
  const DatasetFile back = dataset_from_json(nlohmann::json::parse(to_json(f).dump()));
  EXPECT_TRUE(bit_equal(back.dataset.spectra, f.dataset.spectra));
  EXPECT_EQ(back.dataset.components, f.dataset.components);
  EXPECT_EQ(back.dataset.model, f.dataset.model);
  EXPECT_EQ(back.dataset.seed, f.dataset.seed);
  EXPECT_TRUE(bit_equal(back.dataset.axis, f.dataset.axis));
  ASSERT_EQ(back.pures.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(bit_equal(back.pures[i].intensity, f.pures[i].intensity));
}

TEST(Dataset, BareSpectraAreAccepted) {
  const nlohmann::json j{{"format", "bssnmr-dataset"},
                         {"format_version", kFormatVersion},
                         {"grid", to_json(SpectrumGrid{})},
                         {"spectra", std::vector<std::vector<double>>(3, std::vector<double>(1024, 0.5))}};
  const DatasetFile f = dataset_from_json(j);
  EXPECT_FALSE(f.has_provenance);
  EXPECT_EQ(f.dataset.spectra.rows(), 3);
}

TEST(Dataset, RaggedRowsRejected) {
  nlohmann::json j{{"format", "bssnmr-dataset"},
                   {"format_version", kFormatVersion},
                   {"grid", to_json(SpectrumGrid{})},
                   {"spectra", {std::vector<double>(1024, 0.0), std::vector<double>(1000, 0.0)}}};
  EXPECT_THROW(dataset_from_json(j), std::invalid_argument);
}

TEST(Components, RoundTripIsBitExact) {
  const LibraryFile lib = tiny_library();
  const auto pures = sample_components(lib.components, 3, 1);
  const MixtureDataset ds = assemble_dataset(pures, IntensityModel::inversion, 2, 0.0001);
  const ComponentSet set = decompose(ds, TechniqueId::parse("nnmf:nndsvdar"), 3, 4);
  SpectrumGrid grid;
  const ComponentSet back = components_from_json(nlohmann::json::parse(to_json(set, ds.grid).dump()), &grid);
  EXPECT_EQ(grid.n_points, ds.grid.n_points);
  EXPECT_TRUE(bit_equal(back.components, set.components));
  EXPECT_TRUE(bit_equal(back.coefficients, set.coefficients));
  EXPECT_TRUE(bit_equal(back.row_offset, set.row_offset));
  EXPECT_EQ(back.technique, set.technique);
  EXPECT_EQ(back.metadata, set.metadata);
  EXPECT_TRUE(back.metadata.contains("flipped_rows"));
  EXPECT_TRUE(back.metadata.contains("baseline_offset"));
}

TEST(Report, ListsDiscardedAndFits) {
  const LibraryFile lib = tiny_library();
  std::vector<PureComponent> pures(lib.components.begin(), lib.components.begin() + 2);
  Matrix pred(3, 1024);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 1024; ++j) pred(i, j) = lib.components[i == 2 ? 9 : i].intensity[j];
  const MatchReport r = best_assignment(pred, pure_matrix(pures));
  const nlohmann::json j = to_json(r, pures);
  EXPECT_EQ(j["discarded_predicted"], nlohmann::json::array({2}));
  ASSERT_EQ(j["pairs"].size(), 2u);
  for (const auto& p : j["pairs"]) EXPECT_LT(p["lack_of_fit"].get<double>(), 1e-20);
}

TEST(Svg, RedPureUnderBlackPrediction) {
  const std::vector<double> pure{0, 1, 3, 1, 0}, pred{0, 1, 3, 1, 0};
  const std::string svg = overlay_svg(pred, pure, fit_pair(pred, pure), "t");
  const auto red = svg.find("red");
  const auto black = svg.find("black");
  ASSERT_NE(red, std::string::npos);
  ASSERT_NE(black, std::string::npos);
  EXPECT_LT(red, black);  // drawn first = underneath
}
