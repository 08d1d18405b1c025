#pragma once

// Artifact I/O: CSV emitters, binary field dumps, parameter files, and the
// output manifest.
//
// Binary field dump layout (little-endian throughout):
//   bytes 0..3   magic "FCTL"
//   u32          format version (1)
//   u32          n      coefficients per slice
//   u32          N      number of slices in the file
//   f64          dt     time step between slices
//   f64          L      domain length
//   N*n f64      slices, row-major (slice index outer, coefficient inner)
// A state dump of a trajectory with N steps holds N+1 slices; a control dump
// holds N. Doubles are stored verbatim, so a dump/load round trip is
// bit-identical.
//
// Parameter files come in pairs: `<stem>.bin` holds a 16-byte header (magic
// "FCTP", u32 version, u64 parameter count) followed by the raw parameter
// vector, and `<stem>.meta` holds the feedback shape as key = value text.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fctl/ansatz.hpp"
#include "fctl/common.hpp"
#include "fctl/config.hpp"
#include "fctl/optimize.hpp"
#include "fctl/problem.hpp"
#include "fctl/riccati_gains.hpp"
#include "fctl/trajectory.hpp"

namespace fctl {

static_assert(std::endian::native == std::endian::little,
              "binary dumps assume a little-endian host");

namespace detail {

inline void write_bytes(std::ofstream& out, const void* p, std::size_t count, const std::string& path) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(count));
    if (!out) throw IoError("write failed: " + path);
}

template <class T>
void write_pod(std::ofstream& out, T v, const std::string& path) {
    write_bytes(out, &v, sizeof v, path);
}

template <class T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError("read failed (truncated file?): " + path);
    return v;
}

}  // namespace detail

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// CSV emitters. All floating-point columns print with %.17g so re-running a
// config reproduces files byte-for-byte (wall-time column excepted).

inline std::string csv_double(double v) { return detail::format_double(v); }

inline void write_history_csv(const std::string& path, const std::vector<TrainRecord>& history) {
    std::ostringstream out;
    out << "iteration,cost,cost_std_error,grad_norm,step_size,wall_seconds\n";
    for (const TrainRecord& r : history)
        out << r.iteration << ',' << csv_double(r.cost) << ',' << csv_double(r.cost_std_error)
            << ',' << csv_double(r.grad_norm) << ',' << csv_double(r.step_size) << ','
            << csv_double(r.wall_seconds) << '\n';
    write_text_file(path, out.str());
}

/// Per-step L2 norms of one trajectory: state, control, and (for tracking
/// problems) the distance to the reference profile.
template <class B>
void write_norms_csv(const std::string& path, const ControlProblem<B>& pb, const Trajectory& traj) {
    bool tracking = pb.reference != nullptr;
    std::ostringstream out;
    out << "t,state_l2,control_l2";
    if (tracking) out << ",tracking_l2";
    out << '\n';
    std::vector<double> diff;
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        double t = traj.times[j];
        double state = std::sqrt(pb.basis.l2_norm_sq(traj.states[j]));
        double control =
            j < traj.controls.size() ? std::sqrt(pb.basis.l2_norm_sq(traj.controls[j])) : 0.0;
        out << csv_double(t) << ',' << csv_double(state) << ',' << csv_double(control);
        if (tracking) {
            const std::vector<double>& ref = pb.reference->states[j];
            diff.assign(traj.states[j].begin(), traj.states[j].end());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= ref[i];
            out << ',' << csv_double(std::sqrt(pb.basis.l2_norm_sq(diff)));
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

inline void write_gains_csv(const std::string& path, const RiccatiGainTable& table) {
    std::ostringstream out;
    out << "t";
    for (int k = 0; k <= table.modes(); ++k) out << ",p_" << k;
    out << '\n';
    int N = table.steps();
    for (int j = 0; j <= N; ++j) {
        out << csv_double(table.dt * j);
        for (int k = 0; k <= table.modes(); ++k)
            out << ',' << csv_double(table.p[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
        out << '\n';
    }
    write_text_file(path, out.str());
}

// ---------------------------------------------------------------------------
// Binary field dumps.

struct FieldDump {
    std::uint32_t n = 0;       // coefficients per slice
    std::uint32_t slices = 0;  // slice count
    double dt = 0.0;
    double L = 0.0;
    std::vector<double> data;  // slices * n, row-major
};

inline void write_field_dump(const std::string& path, std::uint32_t n, std::uint32_t slices,
                             double dt, double L, std::span<const double> data) {
    if (data.size() != static_cast<std::size_t>(n) * slices)
        throw std::invalid_argument("write_field_dump: data size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    detail::write_bytes(out, "FCTL", 4, path);
    detail::write_pod<std::uint32_t>(out, 1, path);
    detail::write_pod<std::uint32_t>(out, n, path);
    detail::write_pod<std::uint32_t>(out, slices, path);
    detail::write_pod<double>(out, dt, path);
    detail::write_pod<double>(out, L, path);
    if (!data.empty())
        detail::write_bytes(out, data.data(), data.size() * sizeof(double), path);
}

inline FieldDump read_field_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FCTL", 4) != 0)
        throw IoError("bad magic in field dump: " + path);
    auto version = detail::read_pod<std::uint32_t>(in, path);
    if (version != 1) throw IoError("unsupported field dump version in: " + path);
    FieldDump d;
    d.n = detail::read_pod<std::uint32_t>(in, path);
    d.slices = detail::read_pod<std::uint32_t>(in, path);
    d.dt = detail::read_pod<double>(in, path);
    d.L = detail::read_pod<double>(in, path);
    d.data.resize(static_cast<std::size_t>(d.n) * d.slices);
    if (!d.data.empty()) {
        in.read(reinterpret_cast<char*>(d.data.data()),
                static_cast<std::streamsize>(d.data.size() * sizeof(double)));
        if (!in) throw IoError("read failed (truncated file?): " + path);
    }
    return d;
}

inline void dump_states(const std::string& path, const Trajectory& traj, double L) {
    if (traj.states.empty()) throw std::invalid_argument("dump_states: empty trajectory");
    std::uint32_t n = static_cast<std::uint32_t>(traj.states[0].size());
    std::vector<double> flat;
    flat.reserve(traj.states.size() * n);
    for (const std::vector<double>& s : traj.states) flat.insert(flat.end(), s.begin(), s.end());
    write_field_dump(path, n, static_cast<std::uint32_t>(traj.states.size()), traj.dt, L, flat);
}

inline void dump_controls(const std::string& path, const Trajectory& traj, double L) {
    if (traj.controls.empty()) throw std::invalid_argument("dump_controls: empty control record");
    std::uint32_t n = static_cast<std::uint32_t>(traj.controls[0].size());
    std::vector<double> flat;
    flat.reserve(traj.controls.size() * n);
    for (const std::vector<double>& s : traj.controls) flat.insert(flat.end(), s.begin(), s.end());
    write_field_dump(path, n, static_cast<std::uint32_t>(traj.controls.size()), traj.dt, L, flat);
}

// ---------------------------------------------------------------------------
// Parameter files.

namespace detail {

inline FeedbackFamily family_from_name(const std::string& s) {
    for (FeedbackFamily f :
         {FeedbackFamily::Zero, FeedbackFamily::LinearDiagonal, FeedbackFamily::OneLayerNet,
          FeedbackFamily::TwoLayerReluNet, FeedbackFamily::RbfNemytskii, FeedbackFamily::Riccati})
        if (family_name(f) == s) return f;
    throw IoError("unknown feedback family in parameter file: " + s);
}

inline std::string shape_meta(const FeedbackShape& s) {
    std::ostringstream out;
    out << "family = " << family_name(s.family) << '\n';
    out << "basis = " << (s.basis == BasisKind::Spectral ? "spectral" : "fem") << '\n';
    out << "dim = " << s.dim << '\n';
    out << "T = " << format_double(s.T) << '\n';
    out << "activation = " << (s.activation == Activation::Tanh ? "tanh" : "relu") << '\n';
    out << "hidden1 = " << s.hidden1 << '\n';
    out << "hidden2 = " << s.hidden2 << '\n';
    out << "rbf_neurons = " << s.rbf_neurons << '\n';
    out << "rbf_partition = " << s.rbf_partition << '\n';
    out << "rbf_kappa = " << format_double(s.rbf_kappa) << '\n';
    out << "rbf_fixed_centers = " << (s.rbf_fixed_centers ? 1 : 0) << '\n';
    out << "cutoff_radius = " << format_double(s.cutoff_radius) << '\n';
    return out.str();
}

inline FeedbackShape shape_from_meta(const std::string& text, const std::string& path) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("bad line in parameter meta file " + path);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw IoError(std::string("missing key '") + key + "' in " + path);
        return it->second;
    };
    FeedbackShape s;
    s.family = family_from_name(need("family"));
    std::string basis = need("basis");
    if (basis == "spectral")
        s.basis = BasisKind::Spectral;
    else if (basis == "fem")
        s.basis = BasisKind::FemNodal;
    else
        throw IoError("bad basis in parameter meta file " + path);
    s.dim = std::stoi(need("dim"));
    s.T = std::stod(need("T"));
    s.activation = need("activation") == "relu" ? Activation::Relu : Activation::Tanh;
    s.hidden1 = std::stoi(need("hidden1"));
    s.hidden2 = std::stoi(need("hidden2"));
    s.rbf_neurons = std::stoi(need("rbf_neurons"));
    s.rbf_partition = std::stoi(need("rbf_partition"));
    s.rbf_kappa = std::stod(need("rbf_kappa"));
    s.rbf_fixed_centers = need("rbf_fixed_centers") == "1";
    s.cutoff_radius = std::stod(need("cutoff_radius"));
    return s;
}

}  // namespace detail

/// Writes `<stem>.bin` and `<stem>.meta`. Riccati-gain feedbacks carry no
/// trainable parameters; their gain table is rebuilt from the problem on load.
inline void save_feedback(const std::string& stem, const FeedbackParams& fp) {
    std::string bin = stem + ".bin";
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + bin);
    detail::write_bytes(out, "FCTP", 4, bin);
    detail::write_pod<std::uint32_t>(out, 1, bin);
    detail::write_pod<std::uint64_t>(out, fp.alpha.size(), bin);
    if (!fp.alpha.empty())
        detail::write_bytes(out, fp.alpha.data(), fp.alpha.size() * sizeof(double), bin);
    write_text_file(stem + ".meta", detail::shape_meta(fp.shape));
}

/// Loads a parameter pair saved by save_feedback. The gain table of a
/// family=riccati feedback is not stored; callers must re-attach it.
inline FeedbackParams load_feedback(const std::string& stem) {
    std::string bin = stem + ".bin";
    std::ifstream in(bin, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + bin);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FCTP", 4) != 0)
        throw IoError("bad magic in parameter file: " + bin);
    auto version = detail::read_pod<std::uint32_t>(in, bin);
    if (version != 1) throw IoError("unsupported parameter file version in: " + bin);
    auto count = detail::read_pod<std::uint64_t>(in, bin);
    FeedbackParams fp;
    fp.shape = detail::shape_from_meta(read_text_file(stem + ".meta"), stem + ".meta");
    if (count != param_count(fp.shape))
        throw IoError("parameter count does not match shape in: " + bin);
    fp.alpha.resize(count);
    if (count) {
        in.read(reinterpret_cast<char*>(fp.alpha.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (!in) throw IoError("read failed (truncated file?): " + bin);
    }
    return fp;
}

// ---------------------------------------------------------------------------
// Manifest.

/// Writes `manifest.txt` in `dir`: one "fnv1a64-hex  filename" line per file,
/// sorted by name. Only the named files are listed.
inline void write_manifest(const std::string& dir, std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    std::ostringstream out;
    for (const std::string& name : names) {
        std::string path = dir + "/" + name;
        std::string bytes = read_text_file(path);
        char hex[17];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(
                          std::span<const unsigned char>(
                              reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()))));
        out << hex << "  " << name << '\n';
    }
    write_text_file(dir + "/manifest.txt", out.str());
}

}  // namespace fctl
