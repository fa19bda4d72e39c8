#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>

#include <json.hpp>

#include "nnrange/error.hpp"
#include "nnrange/network.hpp"

namespace nnrange {

using json = nlohmann::json;

namespace {

double real_at(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

Vector parse_vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = real_at(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

Matrix parse_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ParseError(where + ": expected a non-empty array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  Matrix out;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    Vector row = parse_vector(v[r], row_where);
    if (r == 0) {
      cols = static_cast<std::size_t>(row.size());
      out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      throw DimensionMismatch(row_where + ": row has " + std::to_string(row.size()) +
                              " entries, expected " + std::to_string(cols));
    }
    out.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

Network load_network(std::istream& in) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network file: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("network file: expected a JSON object");
  if (!doc.contains("inputs") || !doc["inputs"].is_number_integer() || doc["inputs"].get<long long>() <= 0)
    throw ParseError("network file: \"inputs\" must be a positive integer");
  if (!doc.contains("layers") || !doc["layers"].is_array() || doc["layers"].empty())
    throw ParseError("network file: \"layers\" must be a non-empty array");

  const auto inputs = static_cast<std::size_t>(doc["inputs"].get<long long>());
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < doc["layers"].size(); ++i) {
    const json& l = doc["layers"][i];
    const std::string where = "layers[" + std::to_string(i) + "]";
    if (!l.is_object()) throw ParseError(where + ": expected an object");
    for (const char* field : {"weights", "bias", "activation"})
      if (!l.contains(field)) throw ParseError(where + ": missing field \"" + field + "\"");
    Layer layer;
    layer.weights = parse_matrix(l["weights"], where + ".weights");
    layer.bias = parse_vector(l["bias"], where + ".bias");
    const json& act = l["activation"];
    if (act == "relu")
      layer.has_relu = true;
    else if (act == "linear")
      layer.has_relu = false;
    else
      throw ParseError(where + ".activation: expected \"relu\" or \"linear\"");
    layers.push_back(std::move(layer));
  }
  return Network(inputs, std::move(layers));
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file " + path);
  return load_network(in);
}

void save_network(const Network& net, std::ostream& out) {
  json doc;
  doc["inputs"] = net.input_dim();
  json layers = json::array();
  for (const Layer& layer : net.layers()) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      rows.push_back(vector_json(layer.weights.row(r).transpose()));
    layers.push_back({{"weights", rows},
                      {"bias", vector_json(layer.bias)},
                      {"activation", layer.has_relu ? "relu" : "linear"}});
  }
  doc["layers"] = layers;
  out << doc.dump() << '\n';
}

void save_network_file(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write network file " + path);
  save_network(net, out);
}

}  // namespace nnrange
