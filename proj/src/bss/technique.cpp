#include <sstream>
#include <stdexcept>

#include "bssnmr/bss.hpp"

namespace bssnmr {

namespace {

const char* family_name(Family f) {
  switch (f) {
    case Family::svd: return "svd";
    case Family::truncated_svd: return "truncated_svd";
    case Family::pca: return "pca";
    case Family::fastica: return "fastica";
    case Family::jade: return "jade";
    case Family::sobi: return "sobi";
    case Family::vca: return "vca";
    case Family::nnmf: return "nnmf";
    case Family::simplisma: return "simplisma";
    case Family::mcr: return "mcr";
  }
  return "?";
}

const char* init_name(NnmfInit i) {
  switch (i) {
    case NnmfInit::random: return "random";
    case NnmfInit::nndsvd: return "nndsvd";
    case NnmfInit::nndsvda: return "nndsvda";
    case NnmfInit::nndsvdar: return "nndsvdar";
  }
  return "?";
}

}  // namespace

std::string TechniqueId::str() const {
  std::string s = family_name(family);
  switch (family) {
    case Family::nnmf:
      return s + ":" + init_name(nnmf_init);
    case Family::simplisma:
      return s + ":offset" + std::to_string(simplisma_offset);
    case Family::mcr:
      s += mcr_regression == McrRegression::nnls ? ":nnls" : ":ols_als";
      if (mcr_init == McrInit::random) s += ":random";
      return s;
    default:
      return s;
  }
}

std::string TechniqueId::group() const {
  return family == Family::mcr ? str() : family_name(family);
}

std::vector<TechniqueId> TechniqueId::roster() {
  std::vector<TechniqueId> out;
  for (Family f : {Family::svd, Family::truncated_svd, Family::pca, Family::fastica, Family::jade,
                   Family::sobi, Family::vca}) {
    TechniqueId t;
    t.family = f;
    out.push_back(t);
  }
  for (NnmfInit i : {NnmfInit::random, NnmfInit::nndsvd, NnmfInit::nndsvda, NnmfInit::nndsvdar}) {
    TechniqueId t;
    t.family = Family::nnmf;
    t.nnmf_init = i;
    out.push_back(t);
  }
  for (int o : kSimplismaOffsets) {
    TechniqueId t;
    t.family = Family::simplisma;
    t.simplisma_offset = o;
    out.push_back(t);
  }
  for (McrRegression r : {McrRegression::ols_als, McrRegression::nnls}) {
    for (McrInit i : {McrInit::provided, McrInit::random}) {
      TechniqueId t;
      t.family = Family::mcr;
      t.mcr_regression = r;
      t.mcr_init = i;
      out.push_back(t);
    }
  }
  return out;
}

std::string TechniqueId::roster_text() {
  std::ostringstream os;
  bool first = true;
  for (const auto& t : roster()) {
    os << (first ? "" : ", ") << t.str();
    first = false;
  }
  return os.str();
}

TechniqueId TechniqueId::parse(const std::string& s) {
  for (const auto& t : roster())
    if (t.str() == s) return t;
  throw std::invalid_argument("unknown technique '" + s + "'; valid identifiers: " + roster_text());
}

}  // namespace bssnmr
