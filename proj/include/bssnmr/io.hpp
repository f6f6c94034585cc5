#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "bssnmr/bss.hpp"
#include "bssnmr/lineshape.hpp"
#include "bssnmr/scoring.hpp"
#include "bssnmr/synth.hpp"

namespace bssnmr {

inline constexpr int kFormatVersion = 1;

// Doubles travel as base64 of their little-endian IEEE-754 bytes.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(const std::string& text);

nlohmann::json to_json(const SpectrumGrid& g);
SpectrumGrid grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const QuadrupolarParams& p);
QuadrupolarParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LibraryGridSpec& s);
/// Missing fields take defaults; unknown or ill-typed fields are reported by name.
LibraryGridSpec grid_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PureComponent& pc);
PureComponent pure_from_json(const nlohmann::json& j, const SpectrumGrid& grid);

// --- library -------------------------------------------------------------

struct LibraryFile {
  LibraryGridSpec spec;
  SpectrumGrid grid;
  PowderOptions powder;
  std::string version = "1";
  std::string checksum;  // over ids and intensity bytes, hex
  std::vector<PureComponent> components;
};

std::string library_checksum(std::span<const PureComponent> components);
nlohmann::json to_json(const LibraryFile& lib);
/// Verifies the checksum and component count.
LibraryFile library_from_json(const nlohmann::json& j);

// --- datasets ------------------------------------------------------------

/// Mixture spectra plus optional provenance. Externally supplied data may
/// carry only the grid and spectra.
struct DatasetFile {
  MixtureDataset dataset;
  bool has_provenance = false;
  std::vector<PureComponent> pures;  // ground truth, when known
};

nlohmann::json to_json(const DatasetFile& f);
DatasetFile dataset_from_json(const nlohmann::json& j);
std::string dataset_csv(const MixtureDataset& ds);

// --- component sets ------------------------------------------------------

nlohmann::json to_json(const ComponentSet& set, const SpectrumGrid& grid);
ComponentSet components_from_json(const nlohmann::json& j, SpectrumGrid* grid = nullptr);
std::string components_csv(const ComponentSet& set, const SpectrumGrid& grid);

// --- reports -------------------------------------------------------------

nlohmann::json to_json(const MatchReport& report, std::span<const PureComponent> pures = {});

/// Pure spectrum in red beneath the predicted spectrum in black, the latter
/// mapped onto the pure's scale through the pair's affine fit.
std::string overlay_svg(std::span<const double> predicted, std::span<const double> pure, const PairFit& fit,
                        const std::string& title);

// --- files ---------------------------------------------------------------

/// Parse JSON from disk; failures name the file.
nlohmann::json read_json(const std::filesystem::path& path);
/// Refuses to replace an existing file unless `force`.
void write_text(const std::filesystem::path& path, const std::string& text, bool force);

}  // namespace bssnmr
