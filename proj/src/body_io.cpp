#include "simplex_slice/body_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "simplex_slice/errors.hpp"

namespace sslice {

namespace {

// Minimal JSON tree that keeps number literals verbatim.
struct Node {
    enum class Kind { null, boolean, number, string, array, object };
    Kind kind = Kind::null;
    std::string text;
    bool flag = false;
    std::vector<Node> items;
    std::vector<std::pair<std::string, Node>> fields;

    const Node* find(const std::string& key) const {
        for (const auto& [k, v] : fields)
            if (k == key) return &v;
        return nullptr;
    }
};

class TreeBuilder : public nlohmann::json_sax<nlohmann::json> {
public:
    Node root;
    std::string error;

    bool null() override { return put(Node{}); }
    bool boolean(bool v) override {
        Node n;
        n.kind = Node::Kind::boolean;
        n.flag = v;
        return put(std::move(n));
    }
    bool number_integer(number_integer_t v) override { return number(std::to_string(v)); }
    bool number_unsigned(number_unsigned_t v) override { return number(std::to_string(v)); }
    bool number_float(number_float_t, const string_t& s) override { return number(s); }
    bool string(string_t& s) override {
        Node n;
        n.kind = Node::Kind::string;
        n.text = s;
        return put(std::move(n));
    }
    bool binary(binary_t&) override { return false; }
    bool start_object(std::size_t) override {
        Node n;
        n.kind = Node::Kind::object;
        return open(std::move(n));
    }
    bool key(string_t& k) override {
        stack_.back()->fields.emplace_back(k, Node{});
        return true;
    }
    bool end_object() override {
        stack_.pop_back();
        return true;
    }
    bool start_array(std::size_t) override {
        Node n;
        n.kind = Node::Kind::array;
        return open(std::move(n));
    }
    bool end_array() override {
        stack_.pop_back();
        return true;
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) override {
        error = ex.what();
        return false;
    }

private:
    bool number(const std::string& s) {
        Node n;
        n.kind = Node::Kind::number;
        n.text = s;
        return put(std::move(n));
    }

    Node* slot() {
        if (stack_.empty()) return &root;
        Node* top = stack_.back();
        if (top->kind == Node::Kind::array) {
            top->items.emplace_back();
            return &top->items.back();
        }
        return &top->fields.back().second;
    }

    bool put(Node n) {
        *slot() = std::move(n);
        return true;
    }

    bool open(Node n) {
        Node* s = slot();
        *s = std::move(n);
        stack_.push_back(s);
        return true;
    }

    std::vector<Node*> stack_;
};

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw DataError("body schema error at " + where + ": " + what);
}

Number read_number(const Node& n, const std::string& where) {
    if (n.kind != Node::Kind::number) schema_error(where, "expected a number");
    return Number::from_text(n.text);
}

std::vector<Number> read_vector(const Node& n, const std::string& where, std::size_t size) {
    if (n.kind != Node::Kind::array) schema_error(where, "expected an array of numbers");
    if (n.items.size() != size)
        schema_error(where, "expected " + std::to_string(size) + " entries, got " + std::to_string(n.items.size()));
    std::vector<Number> out;
    out.reserve(size);
    for (std::size_t i = 0; i < size; ++i) out.push_back(read_number(n.items[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::vector<Number>> read_matrix(const Node& n, const std::string& where, std::size_t rows,
                                             std::size_t cols) {
    if (n.kind != Node::Kind::array) schema_error(where, "expected an array of rows");
    if (n.items.size() != rows)
        schema_error(where, "expected " + std::to_string(rows) + " rows, got " + std::to_string(n.items.size()));
    std::vector<std::vector<Number>> out;
    out.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) out.push_back(read_vector(n.items[i], where + "[" + std::to_string(i) + "]", cols));
    return out;
}

std::string read_string(const Node& n, const std::string& where) {
    if (n.kind != Node::Kind::string) schema_error(where, "expected a string");
    return n.text;
}

void check_keys(const Node& n, const std::string& where, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : n.fields) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) schema_error(where, "unknown field '" + k + "'");
    }
}

void write_number(std::ostream& out, const Number& n) { out << n.text; }

void write_vector(std::ostream& out, const std::vector<Number>& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ", ";
        write_number(out, v[i]);
    }
    out << ']';
}

void write_matrix(std::ostream& out, const std::vector<std::vector<Number>>& m, const std::string& indent) {
    out << '[';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << (i ? ",\n" : "\n") << indent;
        write_vector(out, m[i]);
    }
    out << '\n' << indent.substr(2) << ']';
}

Vector to_vector(const std::vector<Number>& v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].value;
    return out;
}

Matrix to_matrix(const std::vector<std::vector<Number>>& m) {
    Matrix out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m.empty() ? 0 : m[0].size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j].value;
    return out;
}

}  // namespace

Number Number::from_double(double v) {
    if (!std::isfinite(v)) throw DataError("cannot store a non-finite number in a body file");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return Number{std::string(buf, res.ptr), v};
}

Number Number::from_text(std::string text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
        throw DataError("not a finite number: '" + text + "'");
    return Number{std::move(text), v};
}

BodySpec parse_body_json(std::string_view text) {
    TreeBuilder builder;
    const std::string copy(text);
    if (!nlohmann::json::sax_parse(copy, &builder)) throw DataError("body file is not valid JSON: " + builder.error);
    const Node& root = builder.root;
    if (root.kind != Node::Kind::object) schema_error("$", "expected an object");
    check_keys(root, "$", {"simplex", "halfspaces", "ellipsoids"});

    BodySpec spec;
    const Node* simplex = root.find("simplex");
    if (!simplex) schema_error("$", "missing field 'simplex'");
    if (simplex->kind == Node::Kind::string) {
        const std::string& s = simplex->text;
        int d = 0;
        const bool prefixed = s.rfind("unit:", 0) == 0;
        const auto res = prefixed ? std::from_chars(s.data() + 5, s.data() + s.size(), d)
                                  : std::from_chars_result{s.data(), std::errc::invalid_argument};
        if (res.ec != std::errc() || res.ptr != s.data() + s.size() || d < 1)
            schema_error("$.simplex", "expected \"unit:<d>\" with d >= 1 or a list of vertex rows");
        spec.dimension = d;
        spec.unit = true;
    } else if (simplex->kind == Node::Kind::array) {
        const std::size_t rows = simplex->items.size();
        if (rows < 2) schema_error("$.simplex", "need d+1 >= 2 vertex rows");
        spec.dimension = static_cast<int>(rows) - 1;
        spec.unit = false;
        spec.vertices = read_matrix(*simplex, "$.simplex", rows, rows - 1);
    } else {
        schema_error("$.simplex", "expected \"unit:<d>\" or a list of vertex rows");
    }
    const auto d = static_cast<std::size_t>(spec.dimension);

    if (const Node* hs = root.find("halfspaces")) {
        if (hs->kind != Node::Kind::array) schema_error("$.halfspaces", "expected an array");
        for (std::size_t i = 0; i < hs->items.size(); ++i) {
            const std::string where = "$.halfspaces[" + std::to_string(i) + "]";
            const Node& h = hs->items[i];
            if (h.kind != Node::Kind::object) schema_error(where, "expected an object");
            check_keys(h, where, {"normal", "offset"});
            const Node* normal = h.find("normal");
            const Node* offset = h.find("offset");
            if (!normal) schema_error(where, "missing field 'normal'");
            if (!offset) schema_error(where, "missing field 'offset'");
            spec.halfspaces.push_back({read_vector(*normal, where + ".normal", d), read_number(*offset, where + ".offset")});
        }
    }

    if (const Node* es = root.find("ellipsoids")) {
        if (es->kind != Node::Kind::array) schema_error("$.ellipsoids", "expected an array");
        for (std::size_t i = 0; i < es->items.size(); ++i) {
            const std::string where = "$.ellipsoids[" + std::to_string(i) + "]";
            const Node& e = es->items[i];
            if (e.kind != Node::Kind::object) schema_error(where, "expected an object");
            check_keys(e, where, {"matrix", "level", "side", "center", "frame"});
            EllipsoidSpec out;
            if (const Node* f = e.find("frame")) {
                const std::string frame = read_string(*f, where + ".frame");
                if (frame == "cartesian") out.frame = EllipsoidFrame::cartesian;
                else if (frame == "barycentric") out.frame = EllipsoidFrame::barycentric;
                else schema_error(where + ".frame", "expected \"cartesian\" or \"barycentric\"");
            }
            const std::size_t n = out.frame == EllipsoidFrame::cartesian ? d : d + 1;
            const Node* matrix = e.find("matrix");
            const Node* level = e.find("level");
            if (!matrix) schema_error(where, "missing field 'matrix'");
            if (!level) schema_error(where, "missing field 'level'");
            out.matrix = read_matrix(*matrix, where + ".matrix", n, n);
            out.level = read_number(*level, where + ".level");
            if (const Node* s = e.find("side")) {
                const std::string side = read_string(*s, where + ".side");
                if (side == "inside") out.side = Side::inside;
                else if (side == "outside") out.side = Side::outside;
                else schema_error(where + ".side", "expected \"inside\" or \"outside\"");
            } else {
                schema_error(where, "missing field 'side'");
            }
            if (const Node* c = e.find("center")) {
                if (out.frame == EllipsoidFrame::barycentric)
                    schema_error(where + ".center", "barycentric ellipsoids are centred at the origin");
                out.center = read_vector(*c, where + ".center", n);
            }
            spec.ellipsoids.push_back(std::move(out));
        }
    }
    return spec;
}

BodySpec read_body_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open body file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_body_json(buf.str());
}

std::string write_body_json(const BodySpec& spec) {
    std::ostringstream out;
    out << "{\n  \"simplex\": ";
    if (spec.unit) {
        out << "\"unit:" << spec.dimension << '"';
    } else {
        write_matrix(out, spec.vertices, "    ");
    }
    if (!spec.halfspaces.empty()) {
        out << ",\n  \"halfspaces\": [";
        for (std::size_t i = 0; i < spec.halfspaces.size(); ++i) {
            out << (i ? ",\n" : "\n") << "    {\"normal\": ";
            write_vector(out, spec.halfspaces[i].normal);
            out << ", \"offset\": ";
            write_number(out, spec.halfspaces[i].offset);
            out << '}';
        }
        out << "\n  ]";
    }
    if (!spec.ellipsoids.empty()) {
        out << ",\n  \"ellipsoids\": [";
        for (std::size_t i = 0; i < spec.ellipsoids.size(); ++i) {
            const auto& e = spec.ellipsoids[i];
            out << (i ? ",\n" : "\n") << "    {\n      \"frame\": \""
                << (e.frame == EllipsoidFrame::cartesian ? "cartesian" : "barycentric") << "\",\n      \"side\": \""
                << (e.side == Side::inside ? "inside" : "outside") << "\",\n      \"level\": ";
            write_number(out, e.level);
            if (!e.center.empty()) {
                out << ",\n      \"center\": ";
                write_vector(out, e.center);
            }
            out << ",\n      \"matrix\": ";
            write_matrix(out, e.matrix, "        ");
            out << "\n    }";
        }
        out << "\n  ]";
    }
    out << "\n}\n";
    return out.str();
}

Simplex body_simplex(const BodySpec& spec) {
    if (spec.unit) return Simplex::unit(spec.dimension);
    return Simplex(to_matrix(spec.vertices).transpose());
}

StandardizedBody to_standardized(const BodySpec& spec) {
    const Simplex simplex = body_simplex(spec);
    std::vector<Halfspace> hs;
    for (const auto& h : spec.halfspaces) hs.emplace_back(to_vector(h.normal), h.offset.value);
    std::vector<EllipsoidConstraint> es;
    for (const auto& e : spec.ellipsoids) {
        const Matrix m = to_matrix(e.matrix);
        if (e.frame == EllipsoidFrame::barycentric) {
            es.push_back({restrict_ellipsoid(Ellipsoid(m, e.level.value), simplex), e.side});
        } else {
            const Vector c = e.center.empty() ? Vector::Zero(spec.dimension) : to_vector(e.center);
            es.push_back({Ellipsoid(m, c, e.level.value), e.side});
        }
    }
    return standardize(simplex, hs, es);
}

ExactStandardized to_exact_band_polytope(const BodySpec& spec) {
    if (!spec.ellipsoids.empty()) throw UsageError("exact volumes need a body without ellipsoids");
    const int d = spec.dimension;
    std::vector<ExactHalfspace> hs;
    Rational scale = 1;

    if (spec.unit) {
        for (const auto& h : spec.halfspaces) {
            ExactHalfspace e;
            for (const auto& a : h.normal) e.normal.push_back(a.exact());
            e.offset = h.offset.exact();
            hs.push_back(std::move(e));
        }
    } else {
        // M = [v_1 - v_0, ..., v_d - v_0]; a.x <= z becomes (M^T a).y <= z - a.v_0.
        std::vector<std::vector<Rational>> v(d + 1, std::vector<Rational>(d));
        for (int i = 0; i <= d; ++i)
            for (int k = 0; k < d; ++k) v[i][k] = spec.vertices[i][k].exact();
        std::vector<std::vector<Rational>> m(d, std::vector<Rational>(d));  // m[row][col]
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) m[k][j] = v[j + 1][k] - v[0][k];

        for (const auto& h : spec.halfspaces) {
            std::vector<Rational> a;
            for (const auto& x : h.normal) a.push_back(x.exact());
            ExactHalfspace e;
            e.normal.assign(d, Rational(0));
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) e.normal[j] += m[k][j] * a[k];
            e.offset = h.offset.exact();
            for (int k = 0; k < d; ++k) e.offset -= a[k] * v[0][k];
            hs.push_back(std::move(e));
        }

        // Exact determinant by elimination.
        auto g = m;
        Rational det = 1;
        for (int col = 0; col < d; ++col) {
            int pivot = col;
            while (pivot < d && g[pivot][col] == 0) ++pivot;
            if (pivot == d) throw SingularSimplex("simplex vertices are affinely dependent");
            if (pivot != col) {
                std::swap(g[pivot], g[col]);
                det = -det;
            }
            det *= g[col][col];
            for (int r = col + 1; r < d; ++r) {
                if (g[r][col] == 0) continue;
                const Rational f = g[r][col] / g[col][col];
                for (int c = col; c < d; ++c) g[r][c] -= f * g[col][c];
            }
        }
        scale = abs(det);
    }
    return {group_into_families(d, hs), scale};
}

}  // namespace sslice
