#include "att/model_io.hpp"

#include <fstream>

#include "att/errors.hpp"

namespace att {

using nlohmann::json;

namespace {

std::vector<double> read_array(const json& doc, const char* key, std::size_t expected) {
  if (!doc.contains(key) || !doc.at(key).is_array())
    throw DataError(std::string("model field '") + key + "' missing or not an array");
  std::vector<double> out;
  out.reserve(doc.at(key).size());
  for (const auto& v : doc.at(key)) {
    if (!v.is_number())
      throw DataError(std::string("model field '") + key + "' has a non-numeric element");
    out.push_back(v.get<double>());
  }
  if (out.size() != expected)
    throw DataError(std::string("model field '") + key + "' has " +
                    std::to_string(out.size()) + " elements, expected " +
                    std::to_string(expected));
  return out;
}

std::size_t read_count(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number_unsigned())
    throw DataError(std::string("model field '") + key + "' missing or not a count");
  return doc.at(key).get<std::size_t>();
}

double read_real(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number())
    throw DataError(std::string("model field '") + key + "' missing or not a number");
  return doc.at(key).get<double>();
}

}  // namespace

json model_to_json(const FactorModel& m, const HyperParams& hp) {
  json doc;
  doc["n_nodes"] = m.n_nodes();
  doc["n_slots"] = m.n_slots();
  doc["rank"] = m.rank();
  doc["window"] = m.window();
  doc["S"] = m.S.data();
  doc["U"] = m.U.data();
  doc["Z"] = m.Z.data();
  doc["a"] = m.a;
  doc["c"] = m.c;
  doc["e"] = m.e;
  doc["W_band"] = m.W.band();
  doc["lambda"] = hp.lambda;
  doc["lambda_b"] = hp.lambda_b;
  return doc;
}

ModelDocument model_from_json(const json& doc) {
  if (!doc.is_object()) throw DataError("model document is not a JSON object");
  const std::size_t n = read_count(doc, "n_nodes");
  const std::size_t k = read_count(doc, "n_slots");
  const std::size_t d = read_count(doc, "rank");
  const std::size_t window = read_count(doc, "window");
  if (d == 0) throw DataError("model rank must be at least 1");
  if (k > 0 && window > k - 1) throw DataError("model window exceeds n_slots - 1");

  ModelDocument out;
  FactorModel& m = out.model;
  m = make_zero_model(n, k, d, window);
  m.S.data() = read_array(doc, "S", n * d);
  m.U.data() = read_array(doc, "U", n * d);
  m.Z.data() = read_array(doc, "Z", k * d);
  m.a = read_array(doc, "a", n);
  m.c = read_array(doc, "c", n);
  m.e = read_array(doc, "e", k);
  m.W.set_band(read_array(doc, "W_band", m.W.band_size()));
  validate(m);

  out.hp.lambda = read_real(doc, "lambda");
  out.hp.lambda_b = read_real(doc, "lambda_b");
  if (!(out.hp.lambda >= 0.0) || !(out.hp.lambda_b >= 0.0))
    throw DataError("model regularization must be nonnegative");
  return out;
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw DataError("write failed for " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

void save_model(const std::string& path, const FactorModel& model,
                const HyperParams& hp) {
  write_json_file(path, model_to_json(model, hp));
}

ModelDocument load_model(const std::string& path) {
  return model_from_json(read_json_file(path));
}

}  // namespace att
