#pragma once

#include <charconv>
#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "panelfield/geometry.hpp"
#include "panelfield/solver.hpp"

namespace panelfield::csv {

/// Shortest decimal form that round-trips to the same double.
inline std::string format(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  if (r.ec != std::errc()) return "nan";
  return {buf, r.ptr};
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// One record per call, fields joined with ',' and terminated by '\n'.
class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << quote(fields[i]);
    }
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

/// panel,cx,cy,cz,area,density
inline void write_densities(std::ostream& os, const Mesh& mesh,
                            const Solution& s) {
  Writer w(os);
  w.row({"panel", "cx", "cy", "cz", "area", "density"});
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const Panel& p = mesh.panels[j];
    const Vec3 c = p.centroid();
    w.row({std::to_string(j), format(c.x()), format(c.y()), format(c.z()),
           format(p.area),
           format(s.densities(static_cast<Eigen::Index>(j)))});
  }
}

}  // namespace panelfield::csv
