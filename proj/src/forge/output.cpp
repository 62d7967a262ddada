#include "forge/output.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cocycle::forge {

namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_number(row[i]);
    }
    out << '\n';
  }
}

void write_json(const std::filesystem::path& path, const OrderedJson& value) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << value.dump(2) << '\n';
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char chunk[4096];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(chunk[i]);
      hash *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

OrderedJson build_manifest(const std::filesystem::path& dir,
                           const std::vector<std::string>& names) {
  OrderedJson manifest = OrderedJson::array();
  for (const std::string& name : names) {
    const std::filesystem::path p = dir / name;
    OrderedJson entry;
    entry["file"] = name;
    entry["bytes"] = static_cast<std::uint64_t>(std::filesystem::file_size(p));
    entry["fnv1a64"] = file_checksum(p);
    manifest.push_back(entry);
  }
  return manifest;
}

// =============================================================================
// SVG
// =============================================================================

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr int kMargin = 50;

}  // namespace

void write_svg_line_chart(const std::filesystem::path& path, const std::string& title,
                          const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw std::runtime_error("svg line chart: mismatched series");
  }
  double xmin = xs.front(), xmax = xs.front(), ymin = ys.front(), ymax = ys.front();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  std::ofstream out(path, std::ios::binary);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='"
      << kHeight << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='14'>" << title << "</text>\n"
      << "<polyline fill='none' stroke='#27509b' stroke-width='1.2' points='";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double px =
        kMargin + (xs[i] - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin);
    const double py =
        kHeight - kMargin - (ys[i] - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin);
    out << format_number(px) << ',' << format_number(py) << ' ';
  }
  out << "'/>\n"
      << "<text x='" << kMargin << "' y='" << kHeight - 12
      << "' font-family='sans-serif' font-size='11'>y: [" << format_number(ymin)
      << ", " << format_number(ymax) << "]  x: [" << format_number(xmin) << ", "
      << format_number(xmax) << "]</text>\n</svg>\n";
}

void write_svg_heatmap(const std::filesystem::path& path, const std::string& title,
                       const std::vector<long long>& counts, int bins) {
  long long peak = 1;
  for (long long c : counts) peak = std::max(peak, c);
  const double cell = static_cast<double>(std::min(kWidth, kHeight) - 2 * kMargin) / bins;
  std::ofstream out(path, std::ios::binary);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='"
      << kWidth << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='14'>" << title << "</text>\n";
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      const long long c = counts[static_cast<std::size_t>(i) * bins + j];
      if (c == 0) continue;
      const int shade =
          255 - static_cast<int>(200.0 * std::log1p(static_cast<double>(c)) /
                                 std::log1p(static_cast<double>(peak)));
      out << "<rect x='" << format_number(kMargin + i * cell) << "' y='"
          << format_number(kMargin + (bins - 1 - j) * cell) << "' width='"
          << format_number(cell + 0.5) << "' height='" << format_number(cell + 0.5)
          << "' fill='rgb(" << shade << ',' << shade << ",255)'/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace cocycle::forge
