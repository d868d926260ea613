#include "ivmkit/model_io.hpp"

#include <sstream>

#include "ivmkit/io_util.hpp"

namespace ivmkit {

namespace {

constexpr const char* kMagic = "ivmkit-model";
constexpr int kVersion = 1;

void append_vector(std::string& out, const Eigen::VectorXd& v) {
  for (long i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(v[i]);
  }
  out += '\n';
}

void append_kernel(std::string& out, const KernelSpec& kernel) {
  out += "kernel ";
  out += kernel_family_name(kernel.family);
  if (kernel.family == KernelFamily::Radial) {
    out += ' ';
    out += format_double(kernel.gamma);
  }
  out += '\n';
}

class LineReader {
 public:
  explicit LineReader(const std::string& content) : in_(content) {}

  /// Next non-empty line or error.
  std::string next(const std::string& context) {
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    throw DataError("model file truncated while reading " + context);
  }

 private:
  std::istringstream in_;
};

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

Eigen::VectorXd parse_vector(const std::string& line, long expected,
                             const std::string& context) {
  const auto toks = tokens(line);
  if (static_cast<long>(toks.size()) != expected) {
    throw DataError("model file: " + context + " expected " +
                    std::to_string(expected) + " values, got " +
                    std::to_string(toks.size()));
  }
  Eigen::VectorXd v(expected);
  for (long i = 0; i < expected; ++i) {
    v[i] = parse_double(toks[static_cast<std::size_t>(i)]);
  }
  return v;
}

KernelSpec parse_kernel(const std::vector<std::string>& toks) {
  if (toks.size() < 2) throw DataError("model file: malformed kernel line");
  const KernelFamily family = kernel_family_from_name(toks[1]);
  if (family == KernelFamily::Linear) return KernelSpec::linear();
  if (toks.size() < 3) throw DataError("model file: radial kernel needs a gamma");
  return KernelSpec::radial(parse_double(toks[2]));
}

}  // namespace

SavedModel SavedModel::from(IvmModel model, std::optional<Standardizer> scaler) {
  SavedModel out;
  out.kind = "ivm";
  out.scaler = std::move(scaler);
  out.ivm = std::move(model);
  return out;
}

SavedModel SavedModel::from(SvmModel model, std::optional<Standardizer> scaler) {
  SavedModel out;
  out.kind = "svm";
  out.scaler = std::move(scaler);
  out.svm = std::move(model);
  return out;
}

double SavedModel::score(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd q = scaler ? scaler->transform(x) : x;
  if (kind == "ivm") {
    if (!ivm) throw InvalidInputError("model of kind ivm has no ivm payload");
    return predict_ivm(*ivm, q);
  }
  if (kind == "svm") {
    if (!svm) throw InvalidInputError("model of kind svm has no svm payload");
    return decision_value(*svm, q);
  }
  throw InvalidInputError("unknown model kind: " + kind);
}

Eigen::VectorXd SavedModel::score(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd out(X.rows());
  for (long i = 0; i < X.rows(); ++i) out[i] = score(Eigen::VectorXd(X.row(i)));
  return out;
}

void save_model(const SavedModel& model, const std::filesystem::path& path) {
  std::string out = std::string(kMagic) + " " + std::to_string(kVersion) + "\n";
  out += "kind " + model.kind + "\n";
  if (!model.feature_names.empty()) {
    out += "features " + std::to_string(model.feature_names.size()) + "\n";
    for (std::size_t i = 0; i < model.feature_names.size(); ++i) {
      if (i > 0) out += ' ';
      out += model.feature_names[i];
    }
    out += '\n';
  }
  if (model.scaler) {
    out += "scaler " + std::to_string(model.scaler->mean.size()) + "\n";
    append_vector(out, model.scaler->mean);
    append_vector(out, model.scaler->scale);
  }

  if (model.kind == "ivm") {
    if (!model.ivm) throw InvalidInputError("model of kind ivm has no ivm payload");
    const IvmModel& m = *model.ivm;
    append_kernel(out, m.kernel);
    out += "lambda " + format_double(m.lambda) + "\n";
    out += "points " + std::to_string(m.import_points.rows()) + " " +
           std::to_string(m.import_points.cols()) + "\n";
    for (long i = 0; i < m.import_points.rows(); ++i) {
      append_vector(out, m.import_points.row(i));
    }
    out += "coeffs " + std::to_string(m.coeffs.size()) + "\n";
    append_vector(out, m.coeffs);
    out += "indices " + std::to_string(m.import_indices.size()) + "\n";
    for (std::size_t i = 0; i < m.import_indices.size(); ++i) {
      if (i > 0) out += ' ';
      out += std::to_string(m.import_indices[i]);
    }
    out += '\n';
    out += "history " + std::to_string(m.history.size()) + "\n";
    for (std::size_t i = 0; i < m.history.size(); ++i) {
      if (i > 0) out += ' ';
      out += format_double(m.history[i]);
    }
    out += '\n';
  } else if (model.kind == "svm") {
    if (!model.svm) throw InvalidInputError("model of kind svm has no svm payload");
    const SvmModel& m = *model.svm;
    append_kernel(out, m.kernel);
    out += "bias " + format_double(m.bias) + "\n";
    out += "converged " + std::to_string(m.converged ? 1 : 0) + "\n";
    out += "points " + std::to_string(m.support_points.rows()) + " " +
           std::to_string(m.support_points.cols()) + "\n";
    for (long i = 0; i < m.support_points.rows(); ++i) {
      append_vector(out, m.support_points.row(i));
    }
    out += "coeffs " + std::to_string(m.dual_coeffs.size()) + "\n";
    append_vector(out, m.dual_coeffs);
    out += "indices " + std::to_string(m.support_indices.size()) + "\n";
    for (std::size_t i = 0; i < m.support_indices.size(); ++i) {
      if (i > 0) out += ' ';
      out += std::to_string(m.support_indices[i]);
    }
    out += '\n';
  } else {
    throw InvalidInputError("unknown model kind: " + model.kind);
  }
  out += "end\n";
  write_file_atomic(path, out);
}

SavedModel load_model(const std::filesystem::path& path) {
  LineReader reader(read_file(path));

  {
    const auto magic = tokens(reader.next("header"));
    if (magic.size() != 2 || magic[0] != kMagic) {
      throw DataError("not a model file: " + path.string());
    }
    if (parse_double(magic[1]) > kVersion) {
      throw DataError("unsupported model version in " + path.string());
    }
  }

  SavedModel model;
  {
    const auto kind = tokens(reader.next("kind"));
    if (kind.size() != 2 || kind[0] != "kind") {
      throw DataError("model file: expected kind line");
    }
    model.kind = kind[1];
  }

  auto line = tokens(reader.next("kernel, features or scaler"));
  if (!line.empty() && line[0] == "features") {
    const std::size_t count = static_cast<std::size_t>(parse_double(line.at(1)));
    const auto names = tokens(reader.next("feature names"));
    if (names.size() != count) {
      throw DataError("model file: feature name count mismatch");
    }
    model.feature_names = names;
    line = tokens(reader.next("kernel or scaler"));
  }
  if (!line.empty() && line[0] == "scaler") {
    const long d = static_cast<long>(parse_double(line.at(1)));
    Standardizer s;
    s.mean = parse_vector(reader.next("scaler means"), d, "scaler means");
    s.scale = parse_vector(reader.next("scaler scales"), d, "scaler scales");
    model.scaler = std::move(s);
    line = tokens(reader.next("kernel"));
  }
  if (line.empty() || line[0] != "kernel") {
    throw DataError("model file: expected kernel line");
  }
  const KernelSpec kernel = parse_kernel(line);

  auto read_points = [&](const std::vector<std::string>& header) {
    if (header.size() != 3 || header[0] != "points") {
      throw DataError("model file: expected points line");
    }
    const long rows = static_cast<long>(parse_double(header[1]));
    const long cols = static_cast<long>(parse_double(header[2]));
    Eigen::MatrixXd points(rows, cols);
    for (long i = 0; i < rows; ++i) {
      points.row(i) = parse_vector(reader.next("point row"), cols, "point row");
    }
    return points;
  };
  auto read_int_list = [&](const std::string& name) {
    const auto header = tokens(reader.next(name));
    if (header.size() != 2 || header[0] != name) {
      throw DataError("model file: expected " + name + " line");
    }
    const long count = static_cast<long>(parse_double(header[1]));
    std::vector<int> out;
    if (count > 0) {
      const Eigen::VectorXd v = parse_vector(reader.next(name), count, name);
      for (long i = 0; i < count; ++i) out.push_back(static_cast<int>(v[i]));
    }
    return out;
  };

  if (model.kind == "ivm") {
    IvmModel m;
    m.kernel = kernel;
    const auto lambda = tokens(reader.next("lambda"));
    if (lambda.size() != 2 || lambda[0] != "lambda") {
      throw DataError("model file: expected lambda line");
    }
    m.lambda = parse_double(lambda[1]);
    m.import_points = read_points(tokens(reader.next("points")));
    const auto coeffs = tokens(reader.next("coeffs"));
    if (coeffs.size() != 2 || coeffs[0] != "coeffs") {
      throw DataError("model file: expected coeffs line");
    }
    m.coeffs = parse_vector(reader.next("coeff values"),
                            static_cast<long>(parse_double(coeffs[1])), "coeffs");
    m.import_indices = read_int_list("indices");
    const auto history = tokens(reader.next("history"));
    if (history.size() != 2 || history[0] != "history") {
      throw DataError("model file: expected history line");
    }
    const long count = static_cast<long>(parse_double(history[1]));
    const Eigen::VectorXd h = parse_vector(reader.next("history values"), count, "history");
    m.history.assign(h.data(), h.data() + h.size());
    model.ivm = std::move(m);
  } else if (model.kind == "svm") {
    SvmModel m;
    m.kernel = kernel;
    const auto bias = tokens(reader.next("bias"));
    if (bias.size() != 2 || bias[0] != "bias") {
      throw DataError("model file: expected bias line");
    }
    m.bias = parse_double(bias[1]);
    const auto conv = tokens(reader.next("converged"));
    if (conv.size() != 2 || conv[0] != "converged") {
      throw DataError("model file: expected converged line");
    }
    m.converged = parse_double(conv[1]) != 0.0;
    m.support_points = read_points(tokens(reader.next("points")));
    const auto coeffs = tokens(reader.next("coeffs"));
    if (coeffs.size() != 2 || coeffs[0] != "coeffs") {
      throw DataError("model file: expected coeffs line");
    }
    m.dual_coeffs = parse_vector(reader.next("coeff values"),
                                 static_cast<long>(parse_double(coeffs[1])), "coeffs");
    m.support_indices = read_int_list("indices");
    model.svm = std::move(m);
  } else {
    throw DataError("model file: unknown kind " + model.kind);
  }

  const auto end = tokens(reader.next("end"));
  if (end.empty() || end[0] != "end") {
    throw DataError("model file: missing end marker");
  }
  return model;
}

}  // namespace ivmkit
