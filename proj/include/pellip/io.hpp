#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pellip/algebra.hpp"
#include "pellip/certify.hpp"
#include "pellip/grid.hpp"
#include "pellip/semigroup.hpp"

namespace pellip {

using Json = nlohmann::json;

/// Schema violations carry the offending field and a reason; the CLI maps
/// them to exit code 2.
struct SchemaError : std::runtime_error {
    std::string field;
    SchemaError(const std::string& field_, const std::string& reason)
        : std::runtime_error("config field '" + field_ + "': " + reason), field(field_) {}
};

const Json& require_key(const Json& j, const std::string& key, const char* context);
double require_number(const Json& j, const std::string& key, const char* context);

/// Matrix forms: {"re": [[..]], "im": [[..]]} (im optional), or the
/// shorthands {"rotation": phi, "dim": d}, {"diag": [..]},
/// {"scaled_identity": s, "dim": d}.
ComplexMatrix parse_matrix(const Json& j);

/// {"d": int, "cells": [{"re": [[..]], "im": [[..]]}, ...]} or
/// {"constant": <matrix>} for a one-cell field.
ComplexMatrixField parse_field(const Json& j);

Json matrix_to_json(const ComplexMatrix& a);
Json field_to_json(const ComplexMatrixField& f);

GridDomain parse_domain(const Json& j);

Json report_to_json(const PEllipticityReport& rep);
Json certificate_to_json(const ConvexityCertificate& cert);

/// Rows of doubles under a fixed header; every value is printed with 17
/// significant digits so reruns are byte-identical.
class CsvWriter {
  public:
    explicit CsvWriter(std::string header) : header_(std::move(header)) {}
    void add_row(const std::vector<double>& row);
    const std::string& text();

  private:
    std::string header_;
    std::vector<std::vector<double>> rows_;
    std::string cache_;
    bool dirty_ = true;
};

uint64_t write_file(const std::filesystem::path& path, const std::string& content);
std::string hex64(uint64_t v);

}  // namespace pellip
