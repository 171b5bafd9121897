#include "pellip/io.hpp"

#include <fstream>

#include "pellip/numeric.hpp"

namespace pellip {

const Json& require_key(const Json& j, const std::string& key, const char* context) {
    if (!j.is_object() || !j.contains(key))
        throw SchemaError(std::string(context) + "." + key, "missing required field");
    return j.at(key);
}

double require_number(const Json& j, const std::string& key, const char* context) {
    const Json& v = require_key(j, key, context);
    if (!v.is_number()) throw SchemaError(std::string(context) + "." + key, "expected a number");
    return v.get<double>();
}

namespace {

MatrixXd parse_real_matrix(const Json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw SchemaError(field, "expected a nonempty array of rows");
    const size_t d = j.size();
    MatrixXd m(static_cast<int>(d), static_cast<int>(d));
    for (size_t r = 0; r < d; ++r) {
        const Json& row = j.at(r);
        if (!row.is_array() || row.size() != d) throw SchemaError(field, "matrix must be square");
        for (size_t c = 0; c < d; ++c) {
            if (!row.at(c).is_number()) throw SchemaError(field, "entries must be numbers");
            m(static_cast<int>(r), static_cast<int>(c)) = row.at(c).get<double>();
        }
    }
    return m;
}

}  // namespace

ComplexMatrix parse_matrix(const Json& j) {
    if (!j.is_object()) throw SchemaError("matrix", "expected an object");
    if (j.contains("rotation")) {
        const double phi = require_number(j, "rotation", "matrix");
        const int d = static_cast<int>(require_number(j, "dim", "matrix"));
        if (d < 1) throw SchemaError("matrix.dim", "dimension must be >= 1");
        return ComplexMatrix::phase_identity(phi, d);
    }
    if (j.contains("scaled_identity")) {
        const double s = require_number(j, "scaled_identity", "matrix");
        const int d = static_cast<int>(require_number(j, "dim", "matrix"));
        if (d < 1) throw SchemaError("matrix.dim", "dimension must be >= 1");
        return ComplexMatrix(s * MatrixXcd::Identity(d, d));
    }
    if (j.contains("diag")) {
        const Json& diag = j.at("diag");
        if (!diag.is_array() || diag.empty()) throw SchemaError("matrix.diag", "expected an array");
        const int d = static_cast<int>(diag.size());
        MatrixXcd m = MatrixXcd::Zero(d, d);
        for (int i = 0; i < d; ++i) m(i, i) = diag.at(static_cast<size_t>(i)).get<double>();
        return ComplexMatrix(m);
    }
    const MatrixXd re = parse_real_matrix(require_key(j, "re", "matrix"), "matrix.re");
    MatrixXd im = MatrixXd::Zero(re.rows(), re.cols());
    if (j.contains("im")) {
        im = parse_real_matrix(j.at("im"), "matrix.im");
        if (im.rows() != re.rows()) throw SchemaError("matrix.im", "re/im size mismatch");
    }
    MatrixXcd m(re.rows(), re.cols());
    m.real() = re;
    m.imag() = im;
    return ComplexMatrix(m);
}

ComplexMatrixField parse_field(const Json& j) {
    if (!j.is_object()) throw SchemaError("field", "expected an object");
    if (j.contains("constant")) return ComplexMatrixField({parse_matrix(j.at("constant"))});
    const Json& cells = require_key(j, "cells", "field");
    if (!cells.is_array() || cells.empty())
        throw SchemaError("field.cells", "expected a nonempty array");
    std::vector<ComplexMatrix> ms;
    ms.reserve(cells.size());
    for (const Json& c : cells) ms.push_back(parse_matrix(c));
    if (j.contains("d")) {
        const int d = static_cast<int>(require_number(j, "d", "field"));
        if (ms[0].dim() != d) throw SchemaError("field.d", "declared dimension mismatch");
    }
    return ComplexMatrixField(std::move(ms));
}

Json matrix_to_json(const ComplexMatrix& a) {
    Json re = Json::array(), im = Json::array();
    for (int i = 0; i < a.dim(); ++i) {
        Json rrow = Json::array(), irow = Json::array();
        for (int j = 0; j < a.dim(); ++j) {
            rrow.push_back(a.entries()(i, j).real());
            irow.push_back(a.entries()(i, j).imag());
        }
        re.push_back(rrow);
        im.push_back(irow);
    }
    return Json{{"re", re}, {"im", im}};
}

Json field_to_json(const ComplexMatrixField& f) {
    Json cells = Json::array();
    for (const auto& c : f.cells()) cells.push_back(matrix_to_json(c));
    return Json{{"d", f.dim()}, {"cells", cells}};
}

GridDomain parse_domain(const Json& j) {
    const std::string kind = require_key(j, "kind", "domain").get<std::string>();
    if (kind == "interval") {
        const int n = static_cast<int>(require_number(j, "n", "domain"));
        const double h = j.contains("h") ? j.at("h").get<double>() : 1.0 / n;
        const std::string bc = j.value("dirichlet", "both");
        return build_interval(n, h, bc == "both" || bc == "left", bc == "both" || bc == "right");
    }
    if (kind == "rectangle") {
        const int nx = static_cast<int>(require_number(j, "nx", "domain"));
        const int ny = static_cast<int>(require_number(j, "ny", "domain"));
        const double h = j.contains("h") ? j.at("h").get<double>() : 1.0 / nx;
        uint8_t sides = 0;
        if (j.contains("dirichlet_sides")) {
            const Json& ds = j.at("dirichlet_sides");
            if (ds.is_string()) {
                const std::string s = ds.get<std::string>();
                if (s == "all") sides = kSidesAll;
                else if (s != "none") throw SchemaError("domain.dirichlet_sides", "unknown side set");
            } else if (ds.is_array()) {
                for (const Json& s : ds) {
                    const std::string name = s.get<std::string>();
                    if (name == "left") sides |= kSideLeft;
                    else if (name == "right") sides |= kSideRight;
                    else if (name == "bottom") sides |= kSideBottom;
                    else if (name == "top") sides |= kSideTop;
                    else throw SchemaError("domain.dirichlet_sides", "unknown side '" + name + "'");
                }
            }
        }
        return build_rectangle(nx, ny, h, sides);
    }
    if (kind == "lshape") {
        const int n = static_cast<int>(require_number(j, "n", "domain"));
        const double h = j.contains("h") ? j.at("h").get<double>() : 1.0 / n;
        return build_lshape(n, h, j.value("dirichlet", std::string("none")) == "all");
    }
    if (kind == "bitmap") {
        const Json& rows = require_key(j, "rows", "domain");
        std::vector<std::string> rs;
        for (const Json& r : rows) rs.push_back(r.get<std::string>());
        return build_bitmap(rs, require_number(j, "h", "domain"),
                            j.value("dirichlet", std::string("none")) == "all");
    }
    if (kind == "horn") {
        return build_horn(require_number(j, "alpha", "domain"), require_number(j, "c", "domain"),
                          require_number(j, "h", "domain"), j.value("x_max", 0.0));
    }
    throw SchemaError("domain.kind", "unknown domain kind '" + kind + "'");
}

Json report_to_json(const PEllipticityReport& rep) {
    Json out{{"p", rep.p}, {"delta", rep.delta}};
    Json mv = Json::array();
    for (int i = 0; i < rep.minimizer.size(); ++i) mv.push_back(rep.minimizer(i));
    out["minimizer"] = mv;
    if (rep.attaining_cell >= 0) out["attaining_cell"] = rep.attaining_cell;
    if (rep.p_range) {
        if (rep.p_range->unbounded)
            out["p_range"] = {{"unbounded", true}, {"p_minus", 1.0}};
        else
            out["p_range"] = {{"unbounded", false},
                              {"p_minus", rep.p_range->p_minus},
                              {"p_plus", rep.p_range->p_plus}};
    }
    return out;
}

namespace {

Json vector_to_json(const VectorXd& v) {
    Json out = Json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

}  // namespace

Json certificate_to_json(const ConvexityCertificate& cert) {
    return Json{{"region", cert.region},
                {"normalization", cert.normalization},
                {"sample_count", cert.sample_count},
                {"seed", cert.seed},
                {"min_normalized_form", cert.min_normalized_form},
                {"scale", cert.scale},
                {"negative_threshold", cert.negative_threshold},
                {"zero_tolerance", cert.zero_tolerance},
                {"witness_omega", vector_to_json(cert.witness_omega)},
                {"witness_x", vector_to_json(cert.witness_x)},
                {"witness_y", vector_to_json(cert.witness_y)},
                {"verdict", verdict_name(cert.verdict)}};
}

void CsvWriter::add_row(const std::vector<double>& row) {
    rows_.push_back(row);
    dirty_ = true;
}

const std::string& CsvWriter::text() {
    if (!dirty_) return cache_;
    cache_ = header_ + "\n";
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            cache_ += format_g17(row[i]);
            cache_ += (i + 1 < row.size()) ? "," : "\n";
        }
    }
    dirty_ = false;
    return cache_;
}

uint64_t write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_file: cannot open " + path.string());
    out << content;
    out.close();
    if (!out) throw std::runtime_error("write_file: failed writing " + path.string());
    return fnv1a64(content);
}

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace pellip
