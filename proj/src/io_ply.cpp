#include "hogs/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace hogs {

namespace {

static_assert(std::endian::native == std::endian::little, "PLY I/O assumes a little-endian host");

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

PlyType parse_type(const std::string& t, const std::string& element) {
  static const std::map<std::string, PlyType> types = {
      {"char", PlyType::I8},    {"int8", PlyType::I8},     {"uchar", PlyType::U8},
      {"uint8", PlyType::U8},   {"short", PlyType::I16},   {"int16", PlyType::I16},
      {"ushort", PlyType::U16}, {"uint16", PlyType::U16},  {"int", PlyType::I32},
      {"int32", PlyType::I32},  {"uint", PlyType::U32},    {"uint32", PlyType::U32},
      {"float", PlyType::F32},  {"float32", PlyType::F32}, {"double", PlyType::F64},
      {"float64", PlyType::F64}};
  const auto it = types.find(t);
  if (it == types.end()) throw DataError("PLY element '" + element + "': unknown type '" + t + "'");
  return it->second;
}

size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::I8:
    case PlyType::U8: return 1;
    case PlyType::I16:
    case PlyType::U16: return 2;
    case PlyType::I32:
    case PlyType::U32:
    case PlyType::F32: return 4;
    case PlyType::F64: return 8;
  }
  return 0;
}

template <typename T>
double load(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double load_binary(PlyType t, const char* p) {
  switch (t) {
    case PlyType::I8: return load<int8_t>(p);
    case PlyType::U8: return load<uint8_t>(p);
    case PlyType::I16: return load<int16_t>(p);
    case PlyType::U16: return load<uint16_t>(p);
    case PlyType::I32: return load<int32_t>(p);
    case PlyType::U32: return load<uint32_t>(p);
    case PlyType::F32: return load<float>(p);
    case PlyType::F64: return load<double>(p);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type;
};

struct PlyElement {
  std::string name;
  size_t count = 0;
  std::vector<PlyProperty> props;
  bool has_list = false;
};

// Vertex properties as columns of doubles.
struct PlyTable {
  size_t count = 0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  const std::vector<double>* find(const std::string& n) const {
    for (size_t i = 0; i < names.size(); ++i) {
      if (names[i] == n) return &columns[i];
    }
    return nullptr;
  }
};

PlyTable read_vertex_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open PLY file " + path);
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    throw DataError(path + ": not a PLY file");
  }
  bool binary = false, have_format = false;
  std::vector<PlyElement> elements;
  while (true) {
    if (!std::getline(in, line)) throw DataError(path + ": truncated PLY header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw == "end_header") break;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else throw DataError(path + ": unsupported PLY format '" + fmt + "'");
      have_format = true;
    } else if (kw == "element") {
      PlyElement e;
      long long n = -1;
      ss >> e.name >> n;
      if (n < 0) throw DataError(path + ": bad element line '" + line + "'");
      e.count = static_cast<size_t>(n);
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) throw DataError(path + ": property before any element");
      std::string t, name;
      ss >> t;
      if (t == "list") {
        elements.back().has_list = true;
        continue;
      }
      ss >> name;
      elements.back().props.push_back({name, parse_type(t, elements.back().name)});
    } else {
      throw DataError(path + ": unexpected PLY header line '" + line + "'");
    }
  }
  if (!have_format) throw DataError(path + ": PLY header lacks a format line");

  PlyTable table;
  bool found = false;
  for (const auto& e : elements) {
    if (e.name != "vertex") {
      // Only elements after the vertex block can be ignored safely.
      if (!found && e.count > 0) {
        throw DataError(path + ": unsupported PLY element '" + e.name + "' before vertices");
      }
      continue;
    }
    if (e.has_list) throw DataError(path + ": list properties in element 'vertex' are unsupported");
    found = true;
    table.count = e.count;
    for (const auto& p : e.props) table.names.push_back(p.name);
    table.columns.assign(e.props.size(), std::vector<double>(e.count));
    if (binary) {
      size_t stride = 0;
      for (const auto& p : e.props) stride += type_size(p.type);
      std::vector<char> buf(stride * e.count);
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      if (static_cast<size_t>(in.gcount()) != buf.size()) {
        throw DataError(path + ": element 'vertex' is truncated");
      }
      for (size_t i = 0; i < e.count; ++i) {
        const char* row = buf.data() + i * stride;
        for (size_t k = 0; k < e.props.size(); ++k) {
          table.columns[k][i] = load_binary(e.props[k].type, row);
          row += type_size(e.props[k].type);
        }
      }
    } else {
      for (size_t i = 0; i < e.count; ++i) {
        for (size_t k = 0; k < e.props.size(); ++k) {
          if (!(in >> table.columns[k][i])) {
            throw DataError(path + ": element 'vertex' is truncated or malformed");
          }
        }
      }
    }
  }
  if (!found) throw DataError(path + ": PLY file has no 'vertex' element");
  return table;
}

void write_header(std::ostream& out, bool binary, size_t count,
                  const std::vector<std::pair<std::string, std::string>>& props) {
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << count << '\n';
  for (const auto& [type, name] : props) out << "property " << type << ' ' << name << '\n';
  out << "end_header\n";
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

uint8_t to_byte(double c) {
  return static_cast<uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

}  // namespace

PointCloud read_ply_points(const std::string& path) {
  const PlyTable t = read_vertex_table(path);
  const auto* x = t.find("x");
  const auto* y = t.find("y");
  const auto* z = t.find("z");
  if (!x || !y || !z) throw DataError(path + ": element 'vertex' lacks x/y/z properties");
  const auto* r = t.find("red");
  const auto* g = t.find("green");
  const auto* b = t.find("blue");
  PointCloud cloud;
  for (size_t i = 0; i < t.count; ++i) {
    const Vec3 p((*x)[i], (*y)[i], (*z)[i]);
    if (!p.allFinite()) throw DataError(path + ": non-finite vertex position");
    cloud.positions.push_back(p);
    if (r && g && b) cloud.colors.emplace_back((*r)[i] / 255.0, (*g)[i] / 255.0, (*b)[i] / 255.0);
    else cloud.colors.emplace_back(0.5, 0.5, 0.5);
  }
  return cloud;
}

void write_ply_points(const PointCloud& cloud, const std::string& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write PLY file " + path);
  write_header(out, binary, cloud.size(),
               {{"float", "x"}, {"float", "y"}, {"float", "z"},
                {"uchar", "red"}, {"uchar", "green"}, {"uchar", "blue"}});
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    const Vec3 c = i < cloud.colors.size() ? cloud.colors[i] : Vec3(0.5, 0.5, 0.5);
    if (binary) {
      for (int k = 0; k < 3; ++k) put(out, static_cast<float>(p[k]));
      for (int k = 0; k < 3; ++k) put(out, to_byte(c[k]));
    } else {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %d %d %d\n", static_cast<float>(p[0]),
                    static_cast<float>(p[1]), static_cast<float>(p[2]), to_byte(c[0]),
                    to_byte(c[1]), to_byte(c[2]));
      out << buf;
    }
  }
  if (!out) throw DataError("failed writing PLY file " + path);
}

void export_3dgs_ply(const GaussianSet& set, const std::string& path) {
  const int K = set.params.sh_coeffs;
  std::vector<std::pair<std::string, std::string>> props;
  for (const char* n : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"}) {
    props.emplace_back("float", n);
  }
  for (int k = 0; k < 3 * (K - 1); ++k) props.emplace_back("float", "f_rest_" + std::to_string(k));
  props.emplace_back("float", "opacity");
  for (int k = 0; k < 3; ++k) props.emplace_back("float", "scale_" + std::to_string(k));
  for (int k = 0; k < 4; ++k) props.emplace_back("float", "rot_" + std::to_string(k));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write PLY file " + path);
  write_header(out, true, set.size(), props);
  for (size_t i = 0; i < set.size(); ++i) {
    const RawGeometry raw = set.geometry(i);
    const Vec3 mean = decode_position(raw, set.parametrization);
    Vec3 log_scale = raw.log_scale;
    if (set.parametrization == Parametrization::Homogeneous) log_scale.array() -= raw.weight;
    for (int k = 0; k < 3; ++k) put(out, static_cast<float>(mean[k]));
    for (int k = 0; k < 3; ++k) put(out, 0.0f);
    const auto sh = set.sh(i);
    for (int c = 0; c < 3; ++c) put(out, static_cast<float>(sh[c]));
    for (int c = 0; c < 3; ++c) {
      for (int k = 1; k < K; ++k) put(out, static_cast<float>(sh[3 * k + c]));
    }
    put(out, static_cast<float>(set.params.opacity[i]));
    for (int k = 0; k < 3; ++k) put(out, static_cast<float>(log_scale[k]));
    for (int k = 0; k < 4; ++k) put(out, static_cast<float>(raw.rotation[k]));
  }
  if (!out) throw DataError("failed writing PLY file " + path);
}

GaussianSet import_3dgs_ply(const std::string& path) {
  const PlyTable t = read_vertex_table(path);
  auto col = [&](const std::string& n) {
    const auto* c = t.find(n);
    if (!c) throw DataError(path + ": element 'vertex' lacks property '" + n + "'");
    return c;
  };
  int rest = 0;
  while (t.find("f_rest_" + std::to_string(rest))) ++rest;
  const int K = 1 + rest / 3;
  int degree = -1;
  for (int d = 0; d <= 3; ++d) {
    if (sh_coeff_count(d) == K && rest == 3 * (K - 1)) degree = d;
  }
  if (degree < 0) throw DataError(path + ": unsupported number of f_rest properties");
  GaussianSet set(Parametrization::Cartesian, degree);
  set.active_sh_degree = degree;
  const auto *x = col("x"), *y = col("y"), *z = col("z"), *op = col("opacity");
  std::vector<double> sh(3 * K);
  for (size_t i = 0; i < t.count; ++i) {
    RawGeometry g;
    g.position = Vec3((*x)[i], (*y)[i], (*z)[i]);
    for (int k = 0; k < 3; ++k) g.log_scale[k] = (*col("scale_" + std::to_string(k)))[i];
    for (int k = 0; k < 4; ++k) g.rotation[k] = (*col("rot_" + std::to_string(k)))[i];
    for (int c = 0; c < 3; ++c) sh[c] = (*col("f_dc_" + std::to_string(c)))[i];
    for (int c = 0; c < 3; ++c) {
      for (int k = 1; k < K; ++k) {
        sh[3 * k + c] = (*col("f_rest_" + std::to_string(c * (K - 1) + k - 1)))[i];
      }
    }
    set.push_back(g, (*op)[i], sh);
  }
  return set;
}

}  // namespace hogs
