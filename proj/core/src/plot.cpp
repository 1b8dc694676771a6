#include <algorithm>
#include <cstdio>
#include <string>

#include "analogy/eval.hpp"

namespace analogy {

std::string render_metrics_svg(std::span<const MetricsRow> rows) {
  constexpr double kW = 640, kH = 360, kLeft = 60, kRight = 60, kTop = 30, kBottom = 50;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  double max_loss = 1e-9;
  for (const auto& r : rows) max_loss = std::max(max_loss, r.loss);
  const double n = rows.size() > 1 ? static_cast<double>(rows.size() - 1) : 1.0;

  auto x_at = [&](std::size_t i) { return kLeft + pw * (rows.size() > 1 ? i / n : 0.5); };
  auto fmt = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", v);
    return std::string(b);
  };

  std::string loss_pts, acc_pts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    loss_pts += fmt(x_at(i)) + "," + fmt(kTop + ph * (1.0 - rows[i].loss / max_loss)) + " ";
    acc_pts += fmt(x_at(i)) + "," + fmt(kTop + ph * (1.0 - rows[i].accuracy)) + " ";
  }

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"360\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"18\" text-anchor=\"middle\">Training statistics per checkpoint</text>\n";
  s += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) + "\" height=\"" +
       fmt(ph) + "\" fill=\"none\" stroke=\"#888\"/>\n";
  s += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(kTop + 4) + "\" text-anchor=\"end\" fill=\"#c0392b\">" +
       fmt(max_loss) + "</text>\n";
  s += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(kTop + ph) + "\" text-anchor=\"end\" fill=\"#c0392b\">0</text>\n";
  s += "<text x=\"" + fmt(kLeft + pw + 8) + "\" y=\"" + fmt(kTop + 4) + "\" fill=\"#2471a3\">1.00</text>\n";
  s += "<text x=\"" + fmt(kLeft + pw + 8) + "\" y=\"" + fmt(kTop + ph) + "\" fill=\"#2471a3\">0.00</text>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s += "<text x=\"" + fmt(x_at(i)) + "\" y=\"" + fmt(kTop + ph + 16) + "\" text-anchor=\"middle\">" +
         std::to_string(rows[i].checkpoint) + "</text>\n";
  }
  s += "<text x=\"320\" y=\"" + fmt(kH - 10) + "\" text-anchor=\"middle\">checkpoint</text>\n";
  s += "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"" + loss_pts + "\"/>\n";
  s += "<polyline fill=\"none\" stroke=\"#2471a3\" stroke-width=\"2\" points=\"" + acc_pts + "\"/>\n";
  s += "<text x=\"" + fmt(kLeft + 8) + "\" y=\"" + fmt(kTop + 16) + "\" fill=\"#c0392b\">loss</text>\n";
  s += "<text x=\"" + fmt(kLeft + 8) + "\" y=\"" + fmt(kTop + 32) + "\" fill=\"#2471a3\">accuracy</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace analogy
