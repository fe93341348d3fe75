#include "slabtbc/io.hpp"

#include <charconv>
#include <chrono>
#include <fstream>

namespace slabtbc::io {

std::uint64_t fnv1a64(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(std::uint64_t v) {
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[v & 0xf];
        v >>= 4;
    }
    buf[16] = '\0';
    return buf;
}

std::string config_hash(const nlohmann::json& j) { return hex64(fnv1a64(j.dump())); }

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string medium_hash(const stepper::SlabMedium& m) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::vector<double>& v) {
        h ^= fnv1a64(v.data(), v.size() * sizeof(double));
        h *= 1099511628211ull;
    };
    mix(m.eps_x());
    mix(m.eps_y());
    mix(m.eps_z());
    mix(m.mu_x());
    mix(m.mu_y());
    mix(m.mu_z());
    return hex64(h);
}

void write_energy_csv(const std::string& path, const std::vector<stepper::EnergyEntry>& rows,
                      const std::string& hash) {
    std::ofstream out(path);
    if (!out) throw DataError("write_energy_csv: cannot open " + path);
    out << "# config_hash=" << hash << "\n";
    out << "step,t,e1,e2,e3,l2_E,l2_H,hcurl_E,hcurl_H,boundary_work\n";
    for (const auto& r : rows) {
        out << r.step << ',' << format_double(r.t) << ',' << format_double(r.e1) << ',';
        if (r.e2) out << format_double(*r.e2);
        out << ',';
        if (r.e3) out << format_double(*r.e3);
        out << ',' << format_double(r.l2_e) << ',' << format_double(r.l2_h) << ','
            << format_double(r.hcurl_e) << ',' << format_double(r.hcurl_h) << ','
            << format_double(r.boundary_work) << "\n";
    }
}

namespace {

void write_array(std::ofstream& out, const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_array(std::ifstream& in, std::vector<double>& v, size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void write_snapshot(const std::string& path, const stepper::FieldState& st,
                    const stepper::SlabMedium& med, const std::string& hash) {
    const LateralGrid& g = med.grid();
    nlohmann::json header;
    header["format"] = "slabtbc-snapshot-v1";
    header["step"] = st.n;
    header["t"] = st.n * st.dt;
    header["dt"] = st.dt;
    header["grid"] = {{"period_x", g.period_x()}, {"period_y", g.period_y()},
                      {"modes_x", g.modes_x()},   {"modes_y", g.modes_y()},
                      {"h1", g.h1()},             {"h2", g.h2()},
                      {"nz", g.nz()}};
    header["component_order"] = {"ex", "ey", "ez", "hx", "hy", "hz"};
    header["medium_hash"] = medium_hash(med);
    header["config_hash"] = hash;
    header["timestamp"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    const std::string hs = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_snapshot: cannot open " + path);
    const std::uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    write_array(out, st.ex);
    write_array(out, st.ey);
    write_array(out, st.ez);
    write_array(out, st.hx);
    write_array(out, st.hy);
    write_array(out, st.hz);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("read_snapshot: cannot open " + path);
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    Snapshot s;
    s.header = nlohmann::json::parse(hs);
    const auto& g = s.header.at("grid");
    const size_t nx = g.at("modes_x").get<int>(), ny = g.at("modes_y").get<int>();
    const size_t nzn = g.at("nz").get<int>(), nzc = nzn - 1;
    read_array(in, s.ex, nx * ny * nzn);
    read_array(in, s.ey, nx * ny * nzn);
    read_array(in, s.ez, nx * ny * nzc);
    read_array(in, s.hx, nx * ny * nzc);
    read_array(in, s.hy, nx * ny * nzc);
    read_array(in, s.hz, nx * ny * nzn);
    if (!in) throw DataError("read_snapshot: truncated payload");
    return s;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("write_text: cannot open " + path);
    out << text;
}

}  // namespace slabtbc::io
