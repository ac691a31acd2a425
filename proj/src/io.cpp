#include "rodflow/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace rodflow {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw IoError("cannot parse number '" + std::string(text) + "'");
  return v;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > j) out.push_back(line.substr(j, i - j));
  }
  return out;
}

long parse_long(std::string_view text) {
  long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw IoError("cannot parse integer '" + std::string(text) + "'");
  return v;
}

}  // namespace

std::string format_record(const DiagnosticsRecord& r) {
  std::string s = std::to_string(r.step);
  const double vals[] = {r.energy.bending,
                         r.energy.twisting,
                         r.energy.penalty,
                         r.energy.tangent_point,
                         r.energy.total,
                         r.total_twist,
                         r.uniformity ? *r.uniformity : std::numeric_limits<double>::quiet_NaN(),
                         r.vy,
                         r.vb,
                         r.violation,
                         r.wall_ms};
  for (double v : vals) {
    s += ',';
    s += format_double(v);
  }
  return s;
}

DiagnosticsRecord parse_record(std::string_view line) {
  const auto f = split(line, ',');
  if (f.size() != 12) throw IoError("record has " + std::to_string(f.size()) + " fields, expected 12");
  DiagnosticsRecord r;
  r.step = parse_long(f[0]);
  r.energy.bending = parse_double(f[1]);
  r.energy.twisting = parse_double(f[2]);
  r.energy.penalty = parse_double(f[3]);
  r.energy.tangent_point = parse_double(f[4]);
  r.energy.total = parse_double(f[5]);
  r.total_twist = parse_double(f[6]);
  const double u = parse_double(f[7]);
  if (!std::isnan(u)) r.uniformity = u;
  r.vy = parse_double(f[8]);
  r.vb = parse_double(f[9]);
  r.violation = parse_double(f[10]);
  r.wall_ms = parse_double(f[11]);
  return r;
}

RecordWriter::RecordWriter(const fs::path& path, bool append) : path_(path) {
  const bool exists = fs::exists(path);
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
  if (!append || !exists) out_ << kRecordHeader << '\n';
}

void RecordWriter::write(const DiagnosticsRecord& r) {
  out_ << format_record(r) << '\n';
  if (!out_) throw IoError("write to '" + path_.string() + "' failed");
}

void RecordWriter::flush() {
  out_.flush();
  if (!out_) throw IoError("write to '" + path_.string() + "' failed");
}

void write_records(const fs::path& path, const std::vector<DiagnosticsRecord>& records) {
  RecordWriter w(path);
  for (const auto& r : records) w.write(r);
  w.flush();
}

std::vector<DiagnosticsRecord> read_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordHeader) throw IoError("'" + path.string() + "' has an unexpected header");
  std::vector<DiagnosticsRecord> out;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const IoError& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void truncate_records(const fs::path& path, long max_step) {
  if (!fs::exists(path)) return;
  std::vector<DiagnosticsRecord> recs = read_records(path);
  std::vector<DiagnosticsRecord> kept;
  for (auto& r : recs)
    if (r.step <= max_step) kept.push_back(r);
  write_records(path, kept);
}

void write_frame(const fs::path& path, const FrameDump& frame) {
  const RodState& s = frame.state;
  if (!s.mesh) throw InvalidArgument("write_frame: state has no mesh");
  const Mesh1D& m = *s.mesh;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "# rodflow-frame v1\n";
  out << "# step " << frame.step << '\n';
  out << "# length " << format_double(m.length()) << '\n';
  out << "# periodic " << (m.periodic() ? 1 : 0) << '\n';
  out << "# nodes " << m.num_director_nodes() << '\n';
  out << "# kappa " << format_double(frame.kappa) << '\n';
  out << "j\ts\tx\ty\tz\tdx\tdy\tdz\tbx\tby\tbz\n";
  for (int j = 0; j < m.num_director_nodes(); ++j) {
    const auto c = static_cast<std::size_t>(m.curve_node(j));
    const Vec3& p = s.curve.pos[c];
    const Vec3& d = s.curve.der[c];
    const Vec3& b = s.director.dir[static_cast<std::size_t>(j)];
    out << j << '\t' << format_double(m.node(j));
    for (const Vec3* v : {&p, &d, &b})
      for (int k = 0; k < 3; ++k) out << '\t' << format_double((*v)(k));
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

FrameDump read_frame(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  auto fail = [&](const std::string& msg) { return IoError(path.string() + ": " + msg); };
  if (!std::getline(in, line) || line != "# rodflow-frame v1") throw fail("not a rodflow frame (bad first line)");
  FrameDump f;
  long nodes = -1;
  int periodic = -1;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) break;
    const auto parts = split_ws(std::string_view(line).substr(2));
    if (parts.size() != 2) throw fail("malformed header line '" + line + "'");
    if (parts[0] == "step") f.step = parse_long(parts[1]);
    else if (parts[0] == "nodes") nodes = parse_long(parts[1]);
    else if (parts[0] == "periodic") periodic = static_cast<int>(parse_long(parts[1]));
    else if (parts[0] == "kappa") f.kappa = parse_double(parts[1]);
  }
  if (nodes < 4 || periodic < 0) throw fail("missing nodes/periodic header");
  if (split_ws(line).size() != 11 || split_ws(line)[0] != "j") throw fail("missing column header");
  std::vector<double> s;
  std::vector<Vec3> pos, der, dir;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split_ws(line);
    if (cols.size() != 11) throw fail("row with " + std::to_string(cols.size()) + " columns");
    if (parse_long(cols[0]) != static_cast<long>(s.size())) throw fail("rows out of order");
    s.push_back(parse_double(cols[1]));
    pos.emplace_back(parse_double(cols[2]), parse_double(cols[3]), parse_double(cols[4]));
    der.emplace_back(parse_double(cols[5]), parse_double(cols[6]), parse_double(cols[7]));
    dir.emplace_back(parse_double(cols[8]), parse_double(cols[9]), parse_double(cols[10]));
  }
  if (static_cast<long>(s.size()) != nodes) throw fail("node count does not match header");
  try {
    f.state.mesh = std::make_shared<const Mesh1D>(std::move(s), periodic != 0);
  } catch (const InvalidArgument& e) {
    throw fail(e.what());
  }
  const auto nc = static_cast<std::size_t>(f.state.mesh->num_curve_nodes());
  f.state.curve.pos.assign(pos.begin(), pos.begin() + static_cast<long>(nc));
  f.state.curve.der.assign(der.begin(), der.begin() + static_cast<long>(nc));
  f.state.director.dir = std::move(dir);
  return f;
}

namespace {

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf.append(p, sizeof(T));
  }
  void put_vec(const Vec3& v) {
    for (int k = 0; k < 3; ++k) put<double>(v(k));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf.append(s);
  }
  std::string buf;
};

class Reader {
 public:
  Reader(const std::string& b, const fs::path& p) : buf(b), path(p) {}
  template <class T>
  T get() {
    if (pos + sizeof(T) > buf.size()) throw IoError(path.string() + ": truncated checkpoint");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  Vec3 get_vec() {
    Vec3 v;
    for (int k = 0; k < 3; ++k) v(k) = get<double>();
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    if (pos + n > buf.size()) throw IoError(path.string() + ": truncated checkpoint");
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
  bool done() const { return pos == buf.size(); }

 private:
  const std::string& buf;
  const fs::path& path;
  std::size_t pos = 0;
};

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr char kMagic[8] = {'R', 'O', 'D', 'C', 'K', 'P', 'T', '1'};

}  // namespace

void write_checkpoint(const fs::path& path, const Checkpoint& c) {
  if (!c.state.mesh) throw InvalidArgument("write_checkpoint: state has no mesh");
  Writer w;
  w.put_string(c.scenario);
  w.put<std::int64_t>(c.step);
  const FlowConfig& k = c.config;
  for (double v : {k.kappa, k.epsilon, k.tau, k.rho, k.q, k.eps_stop}) w.put<double>(v);
  w.put<std::int64_t>(k.max_steps);
  for (double v : k.star_weights) w.put<double>(v);
  for (double v : k.dagger_weights) w.put<double>(v);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.bc.kind));
  for (const Vec3* v : {&c.bc.y0, &c.bc.dy0, &c.bc.yL, &c.bc.dyL, &c.bc.b0, &c.bc.bL}) w.put_vec(*v);
  const Mesh1D& m = *c.state.mesh;
  w.put<std::uint8_t>(m.periodic() ? 1 : 0);
  w.put<std::uint64_t>(m.nodes().size());
  for (double z : m.nodes()) w.put<double>(z);
  for (std::size_t i = 0; i < c.state.curve.pos.size(); ++i) {
    w.put_vec(c.state.curve.pos[i]);
    w.put_vec(c.state.curve.der[i]);
  }
  for (const Vec3& b : c.state.director.dir) w.put_vec(b);

  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kCheckpointVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const auto size = static_cast<std::uint64_t>(w.buf.size());
    out.write(reinterpret_cast<const char*>(&size), sizeof(size));
    out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    const std::uint64_t sum = fnv1a(w.buf);
    out.write(reinterpret_cast<const char*>(&sum), sizeof(sum));
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into '" + path.string() + "': " + ec.message());
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t head = sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t);
  if (file.size() < head + sizeof(std::uint64_t) || std::memcmp(file.data(), kMagic, sizeof(kMagic)) != 0)
    throw IoError(path.string() + ": not a rodflow checkpoint");
  std::uint32_t version = 0;
  std::memcpy(&version, file.data() + sizeof(kMagic), sizeof(version));
  if (version != kCheckpointVersion) {
    throw IoError(path.string() + ": checkpoint version " + std::to_string(version) + " is not supported (expected " +
                  std::to_string(kCheckpointVersion) + ")");
  }
  std::uint64_t size = 0;
  std::memcpy(&size, file.data() + sizeof(kMagic) + sizeof(version), sizeof(size));
  if (file.size() != head + size + sizeof(std::uint64_t)) throw IoError(path.string() + ": truncated checkpoint");
  const std::string payload = file.substr(head, size);
  std::uint64_t sum = 0;
  std::memcpy(&sum, file.data() + head + size, sizeof(sum));
  if (sum != fnv1a(payload)) throw IoError(path.string() + ": checksum mismatch");

  Reader r(payload, path);
  Checkpoint c;
  c.scenario = r.get_string();
  c.step = r.get<std::int64_t>();
  FlowConfig& k = c.config;
  for (double* v : {&k.kappa, &k.epsilon, &k.tau, &k.rho, &k.q, &k.eps_stop}) *v = r.get<double>();
  k.max_steps = r.get<std::int64_t>();
  for (double& v : k.star_weights) v = r.get<double>();
  for (double& v : k.dagger_weights) v = r.get<double>();
  const auto kind = r.get<std::uint32_t>();
  if (kind > 2) throw IoError(path.string() + ": invalid boundary condition kind");
  c.bc.kind = static_cast<BcKind>(kind);
  for (Vec3* v : {&c.bc.y0, &c.bc.dy0, &c.bc.yL, &c.bc.dyL, &c.bc.b0, &c.bc.bL}) *v = r.get_vec();
  const bool periodic = r.get<std::uint8_t>() != 0;
  const auto n = r.get<std::uint64_t>();
  if (n < 4 || n > (1u << 26)) throw IoError(path.string() + ": invalid node count");
  std::vector<double> nodes(n);
  for (auto& z : nodes) z = r.get<double>();
  try {
    c.state.mesh = std::make_shared<const Mesh1D>(std::move(nodes), periodic);
    k.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  const auto nc = static_cast<std::size_t>(c.state.mesh->num_curve_nodes());
  c.state.curve.pos.resize(nc);
  c.state.curve.der.resize(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    c.state.curve.pos[i] = r.get_vec();
    c.state.curve.der[i] = r.get_vec();
  }
  c.state.director.dir.resize(static_cast<std::size_t>(c.state.mesh->num_director_nodes()));
  for (auto& b : c.state.director.dir) b = r.get_vec();
  if (!r.done()) throw IoError(path.string() + ": trailing bytes in checkpoint");
  return c;
}

}  // namespace rodflow
