#ifndef HOPFLAX_FIELD_IO_HPP
#define HOPFLAX_FIELD_IO_HPP

#include <iosfwd>
#include <string>

#include "hopflax/field.hpp"
#include "hopflax/hopf_lax.hpp"

namespace hopflax {

// Text format, one record per line, '#' lines after the magic are comments:
//
//   # hopflax field v1
//   dim 2
//   lo -1 -1
//   hi 1 1
//   counts 65 65
//   bound 1
//   values
//   <one value per line, row-major, last axis fastest>
//
// Solutions use the magic "# hopflax solution v1", add "t",
// "search_radius", "resolution" and "merge_radius" lines, and write
// "value a_1 ... a_n" per point.
// Numbers are written in shortest round-trip form.

void write_field(std::ostream& os, const Field& u);
Field read_field(std::istream& is);
void save_field(const std::string& path, const Field& u);
Field load_field(const std::string& path);

void write_solution(std::ostream& os, const HopfLaxSolution& sol);
HopfLaxSolution read_solution(std::istream& is);
void save_solution(const std::string& path, const HopfLaxSolution& sol);
HopfLaxSolution load_solution(const std::string& path);

}  // namespace hopflax

#endif  // HOPFLAX_FIELD_IO_HPP
