#include "shapegrasp/geometry/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shapegrasp/binary_io.hpp"
#include "shapegrasp/error.hpp"

namespace shapegrasp {

namespace {

std::string lower_extension(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

int ply_type_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "float" || type == "int32" || type == "uint32" ||
      type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  throw Error(ErrorCode::kIo, "unsupported PLY property type " + type);
}

double read_ply_scalar(const char* p, const std::string& type) {
  auto load = [p](auto tag) {
    decltype(tag) v;
    std::memcpy(&v, p, sizeof(v));
    return static_cast<double>(v);
  };
  if (type == "char" || type == "int8") return load(std::int8_t{});
  if (type == "uchar" || type == "uint8") return load(std::uint8_t{});
  if (type == "short" || type == "int16") return load(std::int16_t{});
  if (type == "ushort" || type == "uint16") return load(std::uint16_t{});
  if (type == "int" || type == "int32") return load(std::int32_t{});
  if (type == "uint" || type == "uint32") return load(std::uint32_t{});
  if (type == "float" || type == "float32") return load(float{});
  return load(double{});
}

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyHeader {
  std::string format;
  std::vector<PlyElement> elements;
};

PlyHeader parse_ply_header(std::istream& in) {
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw Error(ErrorCode::kIo, "not a PLY file");
  PlyHeader header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "format") {
      ss >> header.format;
    } else if (key == "element") {
      PlyElement e;
      ss >> e.name >> e.count;
      header.elements.push_back(e);
    } else if (key == "property") {
      if (header.elements.empty()) throw Error(ErrorCode::kIo, "PLY property before element");
      PlyProperty p;
      std::string type;
      ss >> type;
      if (type == "list") {
        p.is_list = true;
        ss >> p.count_type >> p.type >> p.name;
      } else {
        p.type = type;
        ss >> p.name;
      }
      header.elements.back().properties.push_back(p);
    } else if (key == "end_header") {
      return header;
    }
  }
  throw Error(ErrorCode::kIo, "PLY header not terminated");
}

}  // namespace

TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "v") {
      Vec3 v;
      ss >> v.x() >> v.y() >> v.z();
      if (!ss) throw Error(ErrorCode::kIo, "malformed vertex in " + path);
      vertices.push_back(v);
    } else if (key == "f") {
      std::vector<std::uint32_t> idx;
      std::string token;
      while (ss >> token) {
        const long i = std::stol(token.substr(0, token.find('/')));
        const long resolved = i < 0 ? static_cast<long>(vertices.size()) + i : i - 1;
        if (resolved < 0) throw Error(ErrorCode::kIo, "bad face index in " + path);
        idx.push_back(static_cast<std::uint32_t>(resolved));
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return TriMesh::build(std::move(vertices), std::move(triangles));
}

void save_obj(const std::string& path, const TriMesh& mesh) {
  std::ostringstream out;
  out.precision(9);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  write_text_file(path, out.str());
}

TriMesh load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  const PlyHeader header = parse_ply_header(in);
  if (header.format != "binary_little_endian")
    throw Error(ErrorCode::kIo, "only binary_little_endian PLY meshes are supported: " + path);
  std::vector<char> body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > body.size()) throw Error(ErrorCode::kIo, "truncated PLY body in " + path);
  };

  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  for (const auto& e : header.elements) {
    for (std::size_t k = 0; k < e.count; ++k) {
      Vec3 v = Vec3::Zero();
      for (const auto& p : e.properties) {
        if (p.is_list) {
          const int cs = ply_type_size(p.count_type);
          need(cs);
          const auto n = static_cast<std::size_t>(read_ply_scalar(body.data() + pos, p.count_type));
          pos += cs;
          const int is = ply_type_size(p.type);
          need(n * is);
          std::vector<std::uint32_t> idx(n);
          for (std::size_t i = 0; i < n; ++i) {
            idx[i] = static_cast<std::uint32_t>(read_ply_scalar(body.data() + pos, p.type));
            pos += is;
          }
          if (e.name == "face" && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            for (std::size_t i = 1; i + 1 < n; ++i) triangles.push_back({idx[0], idx[i], idx[i + 1]});
          }
        } else {
          const int s = ply_type_size(p.type);
          need(s);
          const double value = read_ply_scalar(body.data() + pos, p.type);
          pos += s;
          if (e.name == "vertex") {
            if (p.name == "x") v.x() = value;
            if (p.name == "y") v.y() = value;
            if (p.name == "z") v.z() = value;
          }
        }
      }
      if (e.name == "vertex") vertices.push_back(v);
    }
  }
  return TriMesh::build(std::move(vertices), std::move(triangles));
}

void save_ply(const std::string& path, const TriMesh& mesh) {
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n"
         << "element vertex " << mesh.vertices.size() << "\n"
         << "property float x\nproperty float y\nproperty float z\n"
         << "element face " << mesh.triangles.size() << "\n"
         << "property list uchar uint vertex_indices\nend_header\n";
  BinaryWriter w;
  w.magic(header.str());
  for (const auto& v : mesh.vertices) {
    w.f32(static_cast<float>(v.x()));
    w.f32(static_cast<float>(v.y()));
    w.f32(static_cast<float>(v.z()));
  }
  for (const auto& t : mesh.triangles) {
    w.magic(std::string(1, static_cast<char>(3)));
    w.u32(t[0]);
    w.u32(t[1]);
    w.u32(t[2]);
  }
  w.save(path);
}

TriMesh load_mesh(const std::string& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".obj") return load_obj(path);
  if (ext == ".ply") return load_ply(path);
  throw Error(ErrorCode::kIo, "unsupported mesh extension: " + path);
}

void save_point_cloud_ply(const std::string& path, const PointCloud& cloud, const std::vector<Color>& colors,
                          const std::vector<PlyEdge>& edges) {
  const bool with_normals = cloud.has_normals();
  const bool with_colors = colors.size() == cloud.size() && !colors.empty();
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (with_normals) out << "property float nx\nproperty float ny\nproperty float nz\n";
  if (with_colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (!edges.empty()) {
    out << "element edge " << edges.size() << "\n"
        << "property int vertex1\nproperty int vertex2\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  out << "end_header\n";
  out.precision(9);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z();
    if (with_normals) out << ' ' << cloud.normals[i].x() << ' ' << cloud.normals[i].y() << ' ' << cloud.normals[i].z();
    if (with_colors) out << ' ' << int(colors[i][0]) << ' ' << int(colors[i][1]) << ' ' << int(colors[i][2]);
    out << '\n';
  }
  for (const auto& e : edges) {
    out << e.a << ' ' << e.b << ' ' << int(e.color[0]) << ' ' << int(e.color[1]) << ' ' << int(e.color[2]) << '\n';
  }
  write_text_file(path, out.str());
}

PointCloud load_point_cloud_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  const PlyHeader header = parse_ply_header(in);
  if (header.format != "ascii") throw Error(ErrorCode::kIo, "expected an ASCII PLY point cloud: " + path);
  PointCloud cloud;
  for (const auto& e : header.elements) {
    for (std::size_t k = 0; k < e.count; ++k) {
      std::string line;
      std::getline(in, line);
      if (e.name != "vertex") continue;
      std::istringstream ss(line);
      Vec3 p = Vec3::Zero(), n = Vec3::Zero();
      bool has_n = false;
      for (const auto& prop : e.properties) {
        double value = 0.0;
        ss >> value;
        if (prop.name == "x") p.x() = value;
        if (prop.name == "y") p.y() = value;
        if (prop.name == "z") p.z() = value;
        if (prop.name == "nx") n.x() = value, has_n = true;
        if (prop.name == "ny") n.y() = value;
        if (prop.name == "nz") n.z() = value;
      }
      cloud.points.push_back(p);
      if (has_n) cloud.normals.push_back(n);
    }
  }
  return cloud;
}

}  // namespace shapegrasp
