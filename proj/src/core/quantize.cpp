#include "quantize.hpp"

#include <algorithm>

#include "json.hpp"

#include "error.hpp"
#include "kmeans.hpp"
#include "textio.hpp"

namespace rp {

QuantizeResult quantize(const std::vector<Stroke>& seq, const QuantizerConfig& cfg) {
  if (seq.empty())
    fail(Errc::invalid_argument, "cannot quantize an empty stroke sequence");

  std::vector<std::vector<double>> grays(seq.size());
  std::vector<std::vector<double>> radii(seq.size());
  for (size_t i = 0; i < seq.size(); ++i) {
    grays[i] = {seq[i].g};
    radii[i] = {seq[i].r0, seq[i].r1};
  }

  // independent sub-seeds for the two clustering problems
  KmeansResult kg = kmeans(grays, cfg.k_gray, cfg.max_iters, cfg.restarts, cfg.seed);
  KmeansResult kt =
      kmeans(radii, cfg.k_thickness, cfg.max_iters, cfg.restarts, cfg.seed ^ 0xA5A5A5A5A5A5A5A5ull);

  QuantizeResult out;
  out.strokes = seq;
  for (size_t i = 0; i < seq.size(); ++i) {
    out.strokes[i].g = kg.centroids[kg.assignments[i]][0];
    out.strokes[i].r0 = kt.centroids[kt.assignments[i]][0];
    out.strokes[i].r1 = kt.centroids[kt.assignments[i]][1];
  }

  for (const auto& c : kg.centroids)
    out.palette.grays.push_back(c[0]);
  std::sort(out.palette.grays.begin(), out.palette.grays.end());
  out.palette.grays.erase(std::unique(out.palette.grays.begin(), out.palette.grays.end()),
                          out.palette.grays.end());

  for (const auto& c : kt.centroids)
    out.palette.thicknesses.push_back({c[0], c[1]});
  std::sort(out.palette.thicknesses.begin(), out.palette.thicknesses.end());
  out.palette.thicknesses.erase(
      std::unique(out.palette.thicknesses.begin(), out.palette.thicknesses.end()),
      out.palette.thicknesses.end());
  return out;
}

int gray_index(const Palette& p, double g) {
  for (size_t i = 0; i < p.grays.size(); ++i)
    if (p.grays[i] == g)
      return static_cast<int>(i);
  return -1;
}

int thickness_index(const Palette& p, double r0, double r1) {
  for (size_t i = 0; i < p.thicknesses.size(); ++i)
    if (p.thicknesses[i][0] == r0 && p.thicknesses[i][1] == r1)
      return static_cast<int>(i);
  return -1;
}

void save_palette_json(const Palette& p, const std::string& path) {
  std::string out = "{\"grays\":[";
  for (size_t i = 0; i < p.grays.size(); ++i) {
    if (i)
      out += ',';
    out += fmt_double(p.grays[i]);
  }
  out += "],\"thicknesses\":[";
  for (size_t i = 0; i < p.thicknesses.size(); ++i) {
    if (i)
      out += ',';
    out += '[' + fmt_double(p.thicknesses[i][0]) + ',' + fmt_double(p.thicknesses[i][1]) + ']';
  }
  out += "]}\n";
  write_file(path, out);
}

Palette load_palette_json(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    fail(Errc::parse, path + ": not a JSON object");
  Palette p;
  try {
    for (const auto& g : j.at("grays"))
      p.grays.push_back(g.get<double>());
    for (const auto& t : j.at("thicknesses")) {
      if (!t.is_array() || t.size() != 2)
        fail(Errc::parse, path + ": thickness entries must be [r0, r1] pairs");
      p.thicknesses.push_back({t[0].get<double>(), t[1].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse, path + ": " + e.what());
  }
  if (p.grays.empty() || p.thicknesses.empty())
    fail(Errc::parse, path + ": palette must list grays and thicknesses");
  if (!std::is_sorted(p.grays.begin(), p.grays.end()) ||
      !std::is_sorted(p.thicknesses.begin(), p.thicknesses.end()))
    fail(Errc::parse, path + ": palette entries must be sorted ascending");
  return p;
}

} // namespace rp
