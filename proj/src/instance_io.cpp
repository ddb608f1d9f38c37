#include "qbench/instance_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qbench/error.hpp"

namespace qbench {

using nlohmann::json;

namespace {

json matrixToJson(const Matrix& m) {
  return json(std::vector<double>(m.data().begin(), m.data().end()));
}

Matrix matrixFromJson(const json& j, std::size_t d, const char* field) {
  const auto entries = j.get<std::vector<double>>();
  if (entries.size() != d * d) {
    throw ValidationError(std::string("instance field ") + field + " must hold " +
                          std::to_string(d * d) + " entries");
  }
  return Matrix::fromRows(d, d, entries);
}

Vector vectorFromJson(const json& j, std::size_t d, const char* field) {
  auto v = j.get<Vector>();
  if (v.size() != d) {
    throw ValidationError(std::string("instance field ") + field + " must hold " +
                          std::to_string(d) + " entries");
  }
  return v;
}

}  // namespace

std::string instanceToJson(const Instance& inst, int indent) {
  json j;
  j["schema"] = kInstanceSchema;
  j["class_name"] = inst.problem_class.name();
  j["dimension"] = inst.problem_class.dimension;
  j["index"] = inst.index;
  j["kappa"] = inst.problem_class.kappa;
  j["U1"] = matrixToJson(inst.u1);
  j["U2"] = matrixToJson(inst.u2);
  j["D1"] = inst.d1;
  j["D2"] = inst.d2;
  j["x1_star"] = inst.x1_star;
  j["x2_star"] = inst.x2_star;
  j["a1"] = inst.a1;
  j["a2"] = inst.a2;
  j["b1"] = inst.b1;
  j["b2"] = inst.b2;
  j["s"] = inst.s;
  j["g_weight"] = inst.g_weight;
  return j.dump(indent);
}

Instance instanceFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("instance JSON: ") + e.what());
  }
  try {
    if (j.value("schema", "") != kInstanceSchema) {
      throw ValidationError(std::string("instance JSON: schema must be \"") + kInstanceSchema +
                            "\"");
    }
    Instance inst;
    inst.problem_class = ProblemClass::parse(j.at("class_name").get<std::string>(),
                                             j.at("dimension").get<int>(),
                                             j.value("kappa", kDefaultKappa));
    inst.index = j.at("index").get<std::uint64_t>();
    const auto d = static_cast<std::size_t>(inst.problem_class.dimension);
    inst.u1 = matrixFromJson(j.at("U1"), d, "U1");
    inst.u2 = matrixFromJson(j.at("U2"), d, "U2");
    inst.d1 = vectorFromJson(j.at("D1"), d, "D1");
    inst.d2 = vectorFromJson(j.at("D2"), d, "D2");
    inst.x1_star = vectorFromJson(j.at("x1_star"), d, "x1_star");
    inst.x2_star = vectorFromJson(j.at("x2_star"), d, "x2_star");
    inst.a1 = j.at("a1").get<double>();
    inst.a2 = j.at("a2").get<double>();
    inst.b1 = j.at("b1").get<double>();
    inst.b2 = j.at("b2").get<double>();
    inst.s = j.at("s").get<double>();
    inst.finalize();
    return inst;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("instance JSON: ") + e.what());
  }
}

void saveInstance(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << instanceToJson(inst) << '\n';
}

Instance loadInstance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return instanceFromJson(buffer.str());
}

}  // namespace qbench
