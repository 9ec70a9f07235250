#include "aharm/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

namespace aharm {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_field_csv(const std::string& path, const AnnulusChart& chart,
                     const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open " + path);
    os << "sigma,theta,value\n";
    for (int i = 0; i < chart.n_sigma; ++i)
        for (int j = 0; j < chart.n_theta; ++j)
            os << format_double(chart.sigma(i)) << ',' << format_double(chart.theta(j))
               << ',' << format_double(f(i, j)) << '\n';
    if (!os) throw io_error("write failed: " + path);
}

void write_field_dump(const std::string& path, const AnnulusChart& chart,
                      const ScalarField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open " + path);
    os.write("AHGD", 4);
    uint32_t header[3] = {1u, static_cast<uint32_t>(chart.n_sigma),
                          static_cast<uint32_t>(chart.n_theta)};
    os.write(reinterpret_cast<const char*>(header), sizeof(header));
    double R = chart.R;
    os.write(reinterpret_cast<const char*>(&R), sizeof(R));
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.values().size() * sizeof(double)));
    if (!os) throw io_error("write failed: " + path);
}

ScalarField read_field_dump(const std::string& path, double* R) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "AHGD") throw io_error("bad magic in " + path);
    uint32_t header[3];
    is.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!is || header[0] != 1u) throw io_error("unsupported dump version in " + path);
    double Rv = 0.0;
    is.read(reinterpret_cast<char*>(&Rv), sizeof(Rv));
    if (R) *R = Rv;
    ScalarField f(static_cast<int>(header[1]), static_cast<int>(header[2]));
    is.read(reinterpret_cast<char*>(f.values().data()),
            static_cast<std::streamsize>(f.values().size() * sizeof(double)));
    if (!is) throw io_error("truncated dump: " + path);
    return f;
}

}  // namespace aharm
