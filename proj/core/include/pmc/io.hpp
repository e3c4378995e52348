#pragma once

#include <iosfwd>
#include <string>

#include "pmc/jets.hpp"
#include "pmc/linearize.hpp"
#include "pmc/mesh.hpp"
#include "pmc/types.hpp"

namespace pmc {

// Plain-text dumps. Doubles are written with 17 significant digits so that
// reruns are byte-identical and values round-trip exactly.

void dump_scalar_field(std::ostream& os, const ScalarField& f);       // `index value` lines
ScalarField load_scalar_field(std::istream& is);

void dump_boundary_function(std::ostream& os, const BoundaryFunction& f);
BoundaryFunction load_boundary_function(std::istream& is);

void dump_metric_field(std::ostream& os, const MetricField& m);       // a11 a12 a22 detg gamma

void dump_jet(std::ostream& os, const Mesh& mesh, const BoundaryJet& jet);

// file helpers
void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace pmc
