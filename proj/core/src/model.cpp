#include "robreg/model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "robreg/rng.hpp"

namespace robreg {

int DataFrame::nrows() const {
  if (columns.empty()) return 0;
  const auto& c = columns.front();
  return static_cast<int>(c.is_factor ? c.codes.size() : c.values.size());
}

const Column* DataFrame::find(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

// One CSV record; handles quoted fields with doubled quotes and CRLF.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // swallow; the following \n ends the record
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field in CSV");
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

DataFrame read_csv(std::istream& in,
                   const std::vector<std::string>& force_factor) {
  std::vector<std::string> header;
  if (!read_record(in, header) || header.empty()) {
    throw DataError("empty CSV: no header row");
  }
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (h.empty()) throw DataError("empty column name in CSV header");
      if (!seen.insert(h).second) {
        throw DataError("duplicate column name in CSV header: " + h);
      }
    }
  }

  const std::size_t ncols = header.size();
  std::vector<std::vector<std::string>> raw(ncols);
  std::vector<std::string> fields;
  std::size_t line = 1;
  while (read_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != ncols) {
      throw DataError("CSV row " + std::to_string(line) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(ncols));
    }
    for (std::size_t j = 0; j < ncols; ++j) {
      if (fields[j].empty()) {
        throw DataError("missing value at CSV row " + std::to_string(line) +
                        ", column " + header[j]);
      }
      raw[j].push_back(std::move(fields[j]));
    }
  }
  if (raw[0].empty()) throw DataError("CSV has a header but no data rows");

  DataFrame df;
  for (std::size_t j = 0; j < ncols; ++j) {
    Column col;
    col.name = header[j];
    const bool forced =
        std::find(force_factor.begin(), force_factor.end(), col.name) !=
        force_factor.end();
    bool numeric = !forced;
    std::vector<double> nums;
    if (numeric) {
      nums.reserve(raw[j].size());
      for (const auto& s : raw[j]) {
        double v;
        if (!parse_number(s, v)) {
          numeric = false;
          break;
        }
        nums.push_back(v);
      }
    }
    if (numeric) {
      col.is_factor = false;
      col.values = std::move(nums);
    } else {
      col.is_factor = true;
      std::map<std::string, int> index;
      for (const auto& s : raw[j]) {
        auto it = index.find(s);
        if (it == index.end()) {
          it = index.emplace(s, static_cast<int>(col.levels.size())).first;
          col.levels.push_back(s);
        }
        col.codes.push_back(it->second);
      }
    }
    df.columns.push_back(std::move(col));
  }
  return df;
}

DataFrame read_csv_file(const std::string& path,
                        const std::vector<std::string>& force_factor) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file: " + path);
  return read_csv(in, force_factor);
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_csv(const DataFrame& df, std::ostream& out) {
  for (std::size_t j = 0; j < df.columns.size(); ++j) {
    if (j) out << ',';
    out << csv_escape(df.columns[j].name);
  }
  out << '\n';
  const int n = df.nrows();
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < df.columns.size(); ++j) {
      if (j) out << ',';
      const auto& c = df.columns[j];
      if (c.is_factor) {
        out << csv_escape(c.levels[c.codes[i]]);
      } else {
        out << format_double(c.values[i]);
      }
    }
    out << '\n';
  }
}

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          c == '.')) {
      return false;
    }
  }
  return !std::isdigit(static_cast<unsigned char>(s.front()));
}

}  // namespace

ModelSpec parse_formula(const std::string& formula) {
  const auto tilde = formula.find('~');
  if (tilde == std::string::npos) {
    throw DataError("formula needs the form `response ~ terms`");
  }
  ModelSpec spec;
  spec.response = trim(formula.substr(0, tilde));
  if (!valid_identifier(spec.response)) {
    throw DataError("invalid response name in formula: `" + spec.response +
                    "`");
  }

  // split the right-hand side on + and -, keeping the operator
  std::string rhs = formula.substr(tilde + 1);
  std::vector<std::pair<char, std::string>> items;  // (op, token)
  char op = '+';
  std::string tok;
  for (char c : rhs) {
    if (c == '+' || c == '-') {
      items.emplace_back(op, trim(tok));
      op = c;
      tok.clear();
    } else {
      tok.push_back(c);
    }
  }
  items.emplace_back(op, trim(tok));
  if (items.size() > 1 && items.front().first == '+' &&
      items.front().second.empty()) {
    items.erase(items.begin());  // leading sign, e.g. `y ~ -1`
  }

  std::set<std::vector<std::string>> seen;
  for (auto& [sign, token] : items) {
    if (token.empty()) {
      throw DataError("empty term in formula right-hand side");
    }
    if (token == "1") {
      if (sign == '-') {
        spec.intercept = false;
      }  // `+ 1` just restates the default
      continue;
    }
    if (sign == '-') {
      throw DataError("only `-1` (intercept removal) may be subtracted");
    }
    Term term;
    std::stringstream ss(token);
    std::string part;
    while (std::getline(ss, part, ':')) {
      part = trim(part);
      if (!valid_identifier(part)) {
        throw DataError("invalid column name in formula term: `" + part +
                        "`");
      }
      term.columns.push_back(part);
    }
    if (term.columns.size() > 2) {
      throw DataError("only main effects and two-way interactions are "
                      "supported: `" +
                      token + "`");
    }
    auto key = term.columns;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) {
      throw DataError("duplicate term in formula: `" + token + "`");
    }
    spec.terms.push_back(std::move(term));
  }
  if (spec.terms.empty() && !spec.intercept) {
    throw DataError("formula has no terms and no intercept");
  }
  return spec;
}

namespace {

// Encoded contribution of one column: either the continuous values
// themselves or the non-reference level indicators of a factor.
struct Encoded {
  std::vector<Vector> columns;
  std::vector<std::string> names;
};

Encoded encode_column(const Column& col, int n) {
  Encoded enc;
  if (!col.is_factor) {
    enc.columns.push_back(col.values);
    enc.names.push_back(col.name);
    return enc;
  }
  const int levels = static_cast<int>(col.levels.size());
  if (levels < 2) {
    throw DataError("factor `" + col.name +
                    "` has a single observed level and contributes no "
                    "columns");
  }
  for (int l = 1; l < levels; ++l) {
    Vector ind(n, 0.0);
    for (int i = 0; i < n; ++i) ind[i] = col.codes[i] == l ? 1.0 : 0.0;
    enc.columns.push_back(std::move(ind));
    enc.names.push_back(col.name + "=" + col.levels[l]);
  }
  return enc;
}

}  // namespace

Design build_design(const DataFrame& df, const ModelSpec& spec) {
  const int n = df.nrows();
  const Column* resp = df.find(spec.response);
  if (resp == nullptr) {
    throw DataError("response column not found: " + spec.response);
  }
  if (resp->is_factor) {
    throw DataError("response column must be numeric: " + spec.response);
  }

  std::vector<Vector> cols;
  std::vector<std::string> names;
  if (spec.intercept) {
    cols.emplace_back(n, 1.0);
    names.push_back("(Intercept)");
  }
  for (const auto& term : spec.terms) {
    std::vector<Encoded> parts;
    for (const auto& cname : term.columns) {
      const Column* c = df.find(cname);
      if (c == nullptr) throw DataError("column not found: " + cname);
      parts.push_back(encode_column(*c, n));
    }
    if (parts.size() == 1) {
      for (std::size_t k = 0; k < parts[0].columns.size(); ++k) {
        cols.push_back(std::move(parts[0].columns[k]));
        names.push_back(parts[0].names[k]);
      }
    } else {
      // elementwise products of the two encodings
      for (std::size_t a = 0; a < parts[0].columns.size(); ++a) {
        for (std::size_t b = 0; b < parts[1].columns.size(); ++b) {
          Vector prod(n);
          for (int i = 0; i < n; ++i) {
            prod[i] = parts[0].columns[a][i] * parts[1].columns[b][i];
          }
          cols.push_back(std::move(prod));
          names.push_back(parts[0].names[a] + ":" + parts[1].names[b]);
        }
      }
    }
  }
  if (cols.empty()) throw DataError("model has no columns");

  Design d;
  d.x = Matrix(n, static_cast<int>(cols.size()));
  for (int j = 0; j < d.x.cols(); ++j) {
    for (int i = 0; i < n; ++i) d.x(i, j) = cols[j][i];
  }
  d.y = resp->values;
  d.column_names = std::move(names);
  return d;
}

DataFrame generate(const GenSpec& spec) {
  if (spec.n < 1) throw DataError("generator needs n >= 1");
  if (spec.outlier_fraction < 0.0 || spec.outlier_fraction >= 0.5) {
    throw DataError("outlier fraction must be in [0, 0.5)");
  }
  for (const auto& freqs : spec.factor_frequencies) {
    if (freqs.size() < 2) {
      throw DataError("each factor needs at least two levels");
    }
    int sum = 0;
    for (int f : freqs) {
      if (f < 1) throw DataError("level frequencies must be positive");
      sum += f;
    }
    if (sum != spec.n) {
      throw DataError("level frequencies must sum to n");
    }
  }

  RngStream rng(spec.seed, 0);
  DataFrame df;

  // factor columns: block layout, shuffled for every factor after the
  // first so the factors cross rather than nest
  for (std::size_t f = 0; f < spec.factor_frequencies.size(); ++f) {
    const auto& freqs = spec.factor_frequencies[f];
    Column col;
    col.name = "f" + std::to_string(f + 1);
    col.is_factor = true;
    for (std::size_t l = 0; l < freqs.size(); ++l) {
      col.levels.push_back("l" + std::to_string(l + 1));
      col.codes.insert(col.codes.end(), freqs[l], static_cast<int>(l));
    }
    if (f > 0) {
      const auto perm = rng.permutation(spec.n);
      std::vector<int> shuffled(spec.n);
      for (int i = 0; i < spec.n; ++i) shuffled[i] = col.codes[perm[i]];
      col.codes = std::move(shuffled);
    }
    df.columns.push_back(std::move(col));
  }

  for (int c = 0; c < spec.continuous_count; ++c) {
    Column col;
    col.name = "x" + std::to_string(c + 1);
    col.values.resize(spec.n);
    for (int i = 0; i < spec.n; ++i) col.values[i] = rng.next_normal();
    df.columns.push_back(std::move(col));
  }

  // response from the implied main-effects model
  Column resp;
  resp.name = "y";
  resp.values.assign(spec.n, 0.0);
  df.columns.insert(df.columns.begin(), std::move(resp));

  Design d = build_design(df, implied_model(spec));
  Vector beta = spec.true_beta;
  if (beta.empty()) {
    beta.resize(d.x.cols());
    for (int j = 0; j < d.x.cols(); ++j) beta[j] = static_cast<double>(j + 1);
  } else if (static_cast<int>(beta.size()) != d.x.cols()) {
    throw DataError("true_beta has " + std::to_string(beta.size()) +
                    " entries but the implied design has " +
                    std::to_string(d.x.cols()) + " columns");
  }

  Vector y = d.x.multiply(beta);
  if (spec.noise_sd > 0.0) {
    for (int i = 0; i < spec.n; ++i) y[i] += spec.noise_sd * rng.next_normal();
  }
  const int n_out =
      static_cast<int>(std::llround(spec.outlier_fraction * spec.n));
  if (n_out > 0) {
    const auto perm = rng.permutation(spec.n);
    for (int k = 0; k < n_out; ++k) y[perm[k]] += spec.outlier_shift;
  }
  df.columns.front().values = std::move(y);
  return df;
}

ModelSpec implied_model(const GenSpec& spec) {
  ModelSpec m;
  m.response = "y";
  m.intercept = true;
  for (std::size_t f = 0; f < spec.factor_frequencies.size(); ++f) {
    m.terms.push_back({{"f" + std::to_string(f + 1)}});
  }
  for (int c = 0; c < spec.continuous_count; ++c) {
    m.terms.push_back({{"x" + std::to_string(c + 1)}});
  }
  return m;
}

}  // namespace robreg
