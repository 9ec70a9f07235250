#pragma once

#include <string>

#include "aharm/chart.hpp"

namespace aharm {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// CSV export with columns sigma,theta,value (one row per node).
void write_field_csv(const std::string& path, const AnnulusChart& chart,
                     const ScalarField& f);

/// Binary grid dump.  Header: magic "AHGD", uint32 version, uint32 n_sigma,
/// uint32 n_theta, float64 R; payload: row-major float64 values
/// (little-endian, theta index fastest).
void write_field_dump(const std::string& path, const AnnulusChart& chart,
                      const ScalarField& f);

/// Reads a binary grid dump written by write_field_dump; returns the field
/// and fills R when non-null.
ScalarField read_field_dump(const std::string& path, double* R = nullptr);

/// Deterministic float formatting shared by all CSV writers (%.17g).
std::string format_double(double v);

}  // namespace aharm
