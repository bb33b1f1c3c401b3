#include <cstdio>
#include <string>

#include "pairhold/cli.hpp"
#include "pairhold/geometry.hpp"

namespace pairhold::cli {

namespace {

constexpr const char* kHumanColor = "blue";
constexpr const char* kFirearmColor = "green";
constexpr const char* kPairColor = "red";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string escape_xml(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string rect(const Box& b, const std::string& title) {
  return "    <rect x=\"" + num(b.x1) + "\" y=\"" + num(b.y1) + "\" width=\"" + num(b.width()) +
         "\" height=\"" + num(b.height()) + "\"><title>" + escape_xml(title) +
         "</title></rect>\n";
}

}  // namespace

std::string render_overlay_svg(const ImageRecord& record, std::span<const PairPrediction> preds) {
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(record.width) +
         "\" height=\"" + num(record.height) + "\" viewBox=\"0 0 " + num(record.width) + " " +
         num(record.height) + "\">\n";
  svg += "  <title>" + escape_xml(record.image_id) + "</title>\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + num(record.width) + "\" height=\"" +
         num(record.height) + "\" fill=\"white\" stroke=\"black\"/>\n";

  svg += "  <g id=\"humans\" fill=\"none\" stroke=\"" + std::string(kHumanColor) +
         "\" stroke-width=\"2\">\n";
  for (std::size_t i = 0; i < record.humans.size(); ++i) {
    svg += rect(record.humans[i].bbox,
                "human " + std::to_string(i) + " score " + num(record.humans[i].score));
  }
  svg += "  </g>\n";

  svg += "  <g id=\"firearms\" fill=\"none\" stroke=\"" + std::string(kFirearmColor) +
         "\" stroke-width=\"2\">\n";
  for (std::size_t i = 0; i < record.firearms.size(); ++i) {
    const auto& f = record.firearms[i];
    svg += rect(f.bbox, std::string(to_string(f.cls)) + " " + std::to_string(i) + " score " +
                            num(f.score));
  }
  svg += "  </g>\n";

  svg += "  <g id=\"pairs\" fill=\"none\" stroke=\"" + std::string(kPairColor) +
         "\" stroke-width=\"3\" stroke-dasharray=\"8 4\">\n";
  for (const auto& p : preds) {
    if (p.image_id != record.image_id) continue;
    svg += rect(union_box(p.human_bbox, p.firearm_bbox),
                "carried " + std::string(to_string(p.firearm_class)) + " score " + num(p.score));
  }
  svg += "  </g>\n</svg>\n";
  return svg;
}

std::string overlay_file_name(std::string_view image_id) {
  std::string name;
  for (char c : image_id) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '_' || c == '-';
    name += safe ? c : '_';
  }
  if (name.empty() || name == "." || name == "..") name = "_" + name;
  return name + ".svg";
}

}  // namespace pairhold::cli
