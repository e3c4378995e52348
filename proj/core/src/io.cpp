#include "pmc/io.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "pmc/errors.hpp"

namespace pmc {

void dump_scalar_field(std::ostream& os, const ScalarField& f) {
    os.precision(17);
    for (int i = 0; i < f.size(); ++i) os << i << " " << f[i] << "\n";
}

ScalarField load_scalar_field(std::istream& is) {
    std::vector<double> vals;
    int idx;
    double v;
    while (is >> idx >> v) {
        if (idx != static_cast<int>(vals.size()))
            throw InvalidArgument("load_scalar_field: indices must be consecutive from 0");
        vals.push_back(v);
    }
    ScalarField f(static_cast<Eigen::Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) f[static_cast<Eigen::Index>(i)] = vals[i];
    return f;
}

void dump_boundary_function(std::ostream& os, const BoundaryFunction& f) {
    os.precision(17);
    for (int i = 0; i < f.size(); ++i) os << i << " " << f[i] << "\n";
}

BoundaryFunction load_boundary_function(std::istream& is) {
    const ScalarField f = load_scalar_field(is);
    return BoundaryFunction(f);
}

void dump_metric_field(std::ostream& os, const MetricField& m) {
    os.precision(17);
    for (int t = 0; t < m.size(); ++t)
        os << m.A[t](0, 0) << " " << m.A[t](0, 1) << " " << m.A[t](1, 1) << " " << m.det_g[t]
           << " " << m.gamma[t] << "\n";
}

void dump_jet(std::ostream& os, const Mesh& mesh, const BoundaryJet& jet) {
    os.precision(17);
    for (int j = 0; j < mesh.num_boundary(); ++j) {
        os << mesh.boundary_theta(j) << " " << jet.trace[j] << " " << jet.tangential[j] << " "
           << jet.normal[j] << " " << jet.second_normal[j];
        if (jet.third_normal) os << " " << (*jet.third_normal)[j];
        os << "\n";
    }
}

void write_file(const std::string& path, const std::string& contents) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << contents;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace pmc
