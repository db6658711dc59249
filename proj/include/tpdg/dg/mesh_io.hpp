#pragma once

#include <json.hpp>

#include "tpdg/dg/mesh.hpp"

namespace tpdg {

/// Geometry-defining mesh document: nodes, element connectivity, map degree,
/// face connectivity, and boundary tags. Round-trips preserve geometry to
/// full double precision (nlohmann serializes doubles losslessly).
inline nlohmann::json mesh_to_json(const MeshGeometry& mesh) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["dim"] = mesh.dim;
  doc["map_degree"] = mesh.map_degree;
  doc["periodic"] = mesh.periodic;
  auto& nodes = doc["nodes"] = nlohmann::json::array();
  for (const auto& x : mesh.nodes) {
    nlohmann::json pt = nlohmann::json::array();
    for (int m = 0; m < mesh.dim; ++m) pt.push_back(x[m]);
    nodes.push_back(std::move(pt));
  }
  doc["elements"] = mesh.elem_nodes;
  auto& faces = doc["faces"] = nlohmann::json::array();
  for (int e = 0; e < mesh.n_elements; ++e) {
    nlohmann::json per_elem = nlohmann::json::array();
    for (int f = 0; f < mesh.faces_per_elem(); ++f) {
      const auto& fc = mesh.faces[e][f];
      per_elem.push_back({{"neighbor", fc.neighbor},
                          {"neighbor_face", fc.neighbor_face},
                          {"orientation", fc.orientation},
                          {"tag", fc.boundary_tag}});
    }
    faces.push_back(std::move(per_elem));
  }
  return doc;
}

/// Parse a mesh document and build the quadrature caches against ref.
inline MeshGeometry mesh_from_json(const nlohmann::json& doc, const ReferenceElement& ref) {
  if (!doc.contains("dim") || !doc.contains("nodes") || !doc.contains("elements"))
    throw ConfigError("mesh_from_json: missing required fields");
  MeshGeometry mesh;
  mesh.dim = doc.at("dim").get<int>();
  mesh.map_degree = doc.value("map_degree", 1);
  mesh.periodic = doc.value("periodic", false);
  for (const auto& pt : doc.at("nodes")) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int m = 0; m < mesh.dim; ++m) x[m] = pt.at(m).get<double>();
    mesh.nodes.push_back(x);
  }
  mesh.elem_nodes = doc.at("elements").get<std::vector<std::vector<int>>>();
  mesh.n_elements = int(mesh.elem_nodes.size());
  mesh.faces.resize(mesh.n_elements);
  const auto& faces = doc.at("faces");
  for (int e = 0; e < mesh.n_elements; ++e)
    for (int f = 0; f < mesh.faces_per_elem(); ++f) {
      const auto& fj = faces.at(e).at(f);
      FaceConn fc;
      fc.neighbor = fj.at("neighbor").get<int>();
      fc.neighbor_face = fj.at("neighbor_face").get<int>();
      fc.orientation = fj.at("orientation").get<int>();
      fc.boundary_tag = fj.at("tag").get<int>();
      mesh.faces[e][f] = fc;
    }
  mesh.precompute(ref);
  return mesh;
}

} // namespace tpdg
