#include "hogs/config.hpp"
#include "hogs/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hogs {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'H', 'G', 'S', 'C'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void str(const std::string& s) {
    pod<uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  template <typename T>
  void vec(const std::vector<T>& v) {
    pod<uint64_t>(v.size());
    out_.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(T)));
  }
  void params(const ParamArrays& p) {
    pod<int32_t>(p.sh_coeffs);
    for (Param k : kAllParams) vec(p.get(k));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}
  template <typename T>
  T pod() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) fail();
    return v;
  }
  std::string str() {
    const uint64_t n = length(1);
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) fail();
    return s;
  }
  template <typename T>
  std::vector<T> vec() {
    const uint64_t n = length(sizeof(T));
    std::vector<T> v(n);
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in_) fail();
    return v;
  }
  ParamArrays params() {
    ParamArrays p;
    p.sh_coeffs = pod<int32_t>();
    for (Param k : kAllParams) p.get(k) = vec<double>();
    if (!p.consistent()) throw DataError(path_ + ": inconsistent parameter arrays");
    return p;
  }

 private:
  uint64_t length(size_t elem) {
    const uint64_t n = pod<uint64_t>();
    if (n > (uint64_t{1} << 40) / elem) throw DataError(path_ + ": corrupt length field");
    return n;
  }
  [[noreturn]] void fail() { throw DataError(path_ + ": truncated checkpoint"); }
  std::istream& in_;
  std::string path_;
};

}  // namespace

void save_checkpoint(const TrainState& st, const std::string& manifest_path,
                     const std::string& path) {
  std::ostringstream buf;
  Writer w(buf);
  buf.write(kMagic, 4);
  w.pod<uint32_t>(kCheckpointVersion);
  w.str(config_to_json(st.config).dump());
  w.str(manifest_path);
  w.pod<uint32_t>(static_cast<uint32_t>(st.set.parametrization));
  w.pod<int32_t>(st.set.max_sh_degree);
  w.pod<int32_t>(st.set.active_sh_degree);
  w.pod<int32_t>(st.iteration);
  w.pod<double>(st.extent);
  w.params(st.set.params);
  w.params(st.adam.m);
  w.params(st.adam.v);
  w.pod<int64_t>(st.adam.step);
  w.vec(st.stats.grad_accum);
  w.vec(st.stats.denom);
  w.vec(st.stats.max_radius);
  std::ostringstream rng;
  rng << st.rng;
  w.str(rng.str());
  w.vec(st.view_queue);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw DataError(path + ": not a checkpoint");
  Reader r(in, path);
  const uint32_t version = r.pod<uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError(path + ": checkpoint version " + std::to_string(version) +
                    " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck;
  TrainState& st = ck.state;
  const auto cfg_json = nlohmann::json::parse(r.str(), nullptr, false);
  if (cfg_json.is_discarded()) throw DataError(path + ": corrupt config record");
  try {
    st.config = config_from_json(cfg_json, TrainConfig{});
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
  ck.manifest_path = r.str();
  const uint32_t p = r.pod<uint32_t>();
  if (p > 2) throw DataError(path + ": unknown parametrization tag");
  st.set.parametrization = static_cast<Parametrization>(p);
  st.set.max_sh_degree = r.pod<int32_t>();
  st.set.active_sh_degree = r.pod<int32_t>();
  if (st.set.max_sh_degree < 0 || st.set.max_sh_degree > 3 || st.set.active_sh_degree < 0 ||
      st.set.active_sh_degree > st.set.max_sh_degree) {
    throw DataError(path + ": invalid SH degree");
  }
  st.iteration = r.pod<int32_t>();
  st.extent = r.pod<double>();
  st.set.params = r.params();
  st.adam.m = r.params();
  st.adam.v = r.params();
  st.adam.step = r.pod<int64_t>();
  st.stats.grad_accum = r.vec<double>();
  st.stats.denom = r.vec<int>();
  st.stats.max_radius = r.vec<double>();
  std::istringstream rng(r.str());
  rng >> st.rng;
  if (!rng) throw DataError(path + ": corrupt RNG state");
  st.view_queue = r.vec<uint32_t>();
  const size_t n = st.set.size();
  if (st.set.params.sh_coeffs != sh_coeff_count(st.set.max_sh_degree) || st.adam.m.size() != n ||
      st.adam.v.size() != n || st.stats.grad_accum.size() != n || st.stats.denom.size() != n ||
      st.stats.max_radius.size() != n) {
    throw DataError(path + ": checkpoint arrays disagree in size");
  }
  return ck;
}

}  // namespace hogs
