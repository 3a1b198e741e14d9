#include "bikeflow/mobility_graph.hpp"

#include "bikeflow/config.hpp"
#include "bikeflow/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <set>
#include <ostream>
#include <sstream>

namespace bikeflow {

namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

bool is_comment_or_blank(const std::string& line) {
    const std::string t = trim(line);
    return t.empty() || t.front() == '#';
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", p);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// MobilityGraph

MobilityGraph MobilityGraph::from_edges(std::vector<NodeId> nodes, const std::vector<Edge>& edges,
                                        const std::map<NodeId, CellCoord>& cells) {
    std::sort(nodes.begin(), nodes.end());
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
        throw ValidationError("duplicate node id");

    MobilityGraph g;
    g.ids_ = std::move(nodes);
    const std::size_t n = g.ids_.size();

    struct Indexed {
        NodeIndex src, dst;
        double p;
    };
    std::vector<Indexed> arcs;
    arcs.reserve(edges.size());
    for (const Edge& e : edges) {
        const auto s = g.find(e.src);
        const auto d = g.find(e.dst);
        if (!s || !d)
            throw ValidationError("edge " + std::to_string(e.src) + " -> " + std::to_string(e.dst) +
                                  " references an unknown node");
        if (!(e.probability > 0.0) || e.probability > 1.0 + Tolerances::unity)
            throw ValidationError("edge " + std::to_string(e.src) + " -> " + std::to_string(e.dst) +
                                  " has probability outside (0, 1]");
        arcs.push_back({*s, *d, e.probability});
    }
    std::sort(arcs.begin(), arcs.end(), [](const Indexed& a, const Indexed& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    for (std::size_t i = 1; i < arcs.size(); ++i) {
        if (arcs[i].src == arcs[i - 1].src && arcs[i].dst == arcs[i - 1].dst)
            throw ValidationError("duplicate edge " + std::to_string(g.ids_[arcs[i].src]) + " -> " +
                                  std::to_string(g.ids_[arcs[i].dst]));
    }

    g.out_offsets_.assign(n + 1, 0);
    for (const Indexed& a : arcs) ++g.out_offsets_[a.src + 1];
    for (std::size_t i = 0; i < n; ++i) g.out_offsets_[i + 1] += g.out_offsets_[i];
    g.out_arcs_.reserve(arcs.size());
    for (const Indexed& a : arcs) g.out_arcs_.push_back({a.dst, a.p});

    for (NodeIndex u = 0; u < n; ++u) {
        const auto first = g.out_arcs_.begin() + std::ptrdiff_t(g.out_offsets_[u]);
        const auto last = g.out_arcs_.begin() + std::ptrdiff_t(g.out_offsets_[u + 1]);
        if (first == last)
            throw ValidationError("node " + std::to_string(g.ids_[u]) + " has no outgoing edge");
        double sum = 0.0;
        for (auto it = first; it != last; ++it) sum += it->probability;
        if (std::abs(sum - 1.0) > Tolerances::unity) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.12g", sum);
            throw ValidationError("node " + std::to_string(g.ids_[u]) +
                                  " has outgoing probability sum " + buf);
        }
        if (sum != 1.0)
            for (auto it = first; it != last; ++it) it->probability /= sum;
    }

    g.in_offsets_.assign(n + 1, 0);
    for (const Arc& a : g.out_arcs_) ++g.in_offsets_[a.node + 1];
    for (std::size_t i = 0; i < n; ++i) g.in_offsets_[i + 1] += g.in_offsets_[i];
    g.in_arcs_.resize(g.out_arcs_.size());
    std::vector<std::size_t> fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (NodeIndex u = 0; u < n; ++u)
        for (std::size_t i = g.out_offsets_[u]; i < g.out_offsets_[u + 1]; ++i) {
            const Arc& a = g.out_arcs_[i];
            g.in_arcs_[fill[a.node]++] = {u, a.probability};
        }

    if (!cells.empty()) {
        g.cells_.resize(n);
        for (const auto& [id, c] : cells)
            if (auto i = g.find(id)) g.cells_[*i] = c;
    }
    return g;
}

std::optional<NodeIndex> MobilityGraph::find(NodeId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return NodeIndex(it - ids_.begin());
}

NodeIndex MobilityGraph::index_of(NodeId id) const {
    if (auto i = find(id)) return *i;
    throw ValidationError("unknown node id " + std::to_string(id));
}

std::span<const Arc> MobilityGraph::out_arcs(NodeIndex u) const {
    return std::span<const Arc>(out_arcs_).subspan(out_offsets_.at(u),
                                                   out_offsets_[u + 1] - out_offsets_[u]);
}

std::span<const Arc> MobilityGraph::in_arcs(NodeIndex v) const {
    return std::span<const Arc>(in_arcs_).subspan(in_offsets_.at(v),
                                                  in_offsets_[v + 1] - in_offsets_[v]);
}

double MobilityGraph::self_loop(NodeIndex u) const {
    for (const Arc& a : out_arcs(u))
        if (a.node == u) return a.probability;
    return 0.0;
}

std::optional<CellCoord> MobilityGraph::cell(NodeIndex i) const {
    if (cells_.empty()) return std::nullopt;
    return cells_.at(i);
}

std::vector<Edge> MobilityGraph::edges() const {
    std::vector<Edge> out;
    out.reserve(out_arcs_.size());
    for (NodeIndex u = 0; u < ids_.size(); ++u)
        for (const Arc& a : out_arcs(u)) out.push_back({ids_[u], ids_[a.node], a.probability});
    return out;
}

std::map<NodeId, CellCoord> MobilityGraph::cells() const {
    std::map<NodeId, CellCoord> out;
    for (NodeIndex i = 0; i < cells_.size(); ++i)
        if (cells_[i]) out.emplace(ids_[i], *cells_[i]);
    return out;
}

bool approx_equal(const MobilityGraph& a, const MobilityGraph& b, double tol) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
    if (!std::equal(a.ids().begin(), a.ids().end(), b.ids().begin())) return false;
    if (a.cells() != b.cells()) return false;
    const auto ea = a.edges();
    const auto eb = b.edges();
    for (std::size_t i = 0; i < ea.size(); ++i) {
        if (ea[i].src != eb[i].src || ea[i].dst != eb[i].dst) return false;
        if (std::abs(ea[i].probability - eb[i].probability) > tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Grid

void Grid::validate() const {
    if (!(cell_size_m > 0.0)) throw ValidationError("grid cell size must be positive");
    if (n_rows < 1 || n_cols < 1) throw ValidationError("grid needs at least one row and column");
    if (origin_lat < -90.0 || origin_lat > 90.0 || origin_lon < -180.0 || origin_lon > 180.0)
        throw ValidationError("grid origin outside WGS84 range");
}

std::array<double, 2> Grid::to_local(double lat, double lon) const {
    const double east = (lon - origin_lon) * kDegToRad * std::cos(origin_lat * kDegToRad) *
                        kEarthRadiusM;
    const double north = (lat - origin_lat) * kDegToRad * kEarthRadiusM;
    return {north, east};
}

std::array<double, 2> Grid::to_geo(double north_m, double east_m) const {
    const double lat = origin_lat + north_m / kEarthRadiusM / kDegToRad;
    const double lon =
        origin_lon + east_m / (kEarthRadiusM * std::cos(origin_lat * kDegToRad)) / kDegToRad;
    return {lat, lon};
}

std::array<std::array<double, 2>, 4> Grid::cell_corners(CellCoord c) const {
    const double x0 = c.col * cell_size_m, x1 = (c.col + 1) * cell_size_m;
    const double y0 = c.row * cell_size_m, y1 = (c.row + 1) * cell_size_m;
    return {to_geo(y0, x0), to_geo(y0, x1), to_geo(y1, x1), to_geo(y1, x0)};
}

Grid Grid::covering(std::span<const Ride> rides, double cell_size_m) {
    if (rides.empty()) throw ValidationError("cannot derive a grid from an empty ride set");
    double min_lat = 90.0, min_lon = 180.0;
    for (const Ride& r : rides) {
        min_lat = std::min({min_lat, r.start_lat, r.end_lat});
        min_lon = std::min({min_lon, r.start_lon, r.end_lon});
    }
    Grid g{min_lat, min_lon, cell_size_m, 1, 1};
    double max_e = 0.0, max_n = 0.0;
    for (const Ride& r : rides) {
        for (auto [lat, lon] : {std::pair{r.start_lat, r.start_lon}, std::pair{r.end_lat, r.end_lon}}) {
            const auto [n, e] = g.to_local(lat, lon);
            max_e = std::max(max_e, e);
            max_n = std::max(max_n, n);
        }
    }
    g.n_cols = int(std::floor(max_e / cell_size_m)) + 1;
    g.n_rows = int(std::floor(max_n / cell_size_m)) + 1;
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Rides

bool Ride::valid() const {
    auto lat_ok = [](double v) { return v >= -90.0 && v <= 90.0; };
    auto lon_ok = [](double v) { return v >= -180.0 && v <= 180.0; };
    return end_time >= start_time && lat_ok(start_lat) && lat_ok(end_lat) && lon_ok(start_lon) &&
           lon_ok(end_lon);
}

namespace {

// Days since 1970-01-01 of a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = unsigned(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + std::int64_t(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = unsigned(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = int(std::int64_t(yoe) + era * 400 + (m <= 2));
}

}  // namespace

std::int64_t parse_iso8601(const std::string& raw) {
    const std::string text = trim(raw);
    auto fail = [&]() -> std::int64_t { throw ValidationError("invalid timestamp '" + text + "'"); };
    auto digits = [&](std::size_t pos, std::size_t len, int& out) {
        if (pos + len > text.size()) return false;
        out = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
            out = out * 10 + (text[i] - '0');
        }
        return true;
    };
    int y, mo, d, h, mi, s = 0;
    if (!digits(0, 4, y) || text.size() < 16 || text[4] != '-' || !digits(5, 2, mo) ||
        text[7] != '-' || !digits(8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
        !digits(11, 2, h) || text[13] != ':' || !digits(14, 2, mi))
        return fail();
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        if (!digits(pos + 1, 2, s)) return fail();
        pos += 3;
        if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        }
    }
    if (pos < text.size()) {
        const char c = text[pos];
        int oh, om;
        if (c == 'Z' && pos + 1 == text.size()) {
        } else if ((c == '+' || c == '-') && digits(pos + 1, 2, oh) &&
                   (pos + 3 == text.size() ||
                    (text[pos + 3] == ':' && digits(pos + 4, 2, om) && pos + 6 == text.size()) ||
                    (digits(pos + 3, 2, om) && pos + 5 == text.size()))) {
        } else {
            return fail();
        }
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return fail();
    return days_from_civil(y, unsigned(mo), unsigned(d)) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t seconds) {
    std::int64_t days = seconds / 86400;
    std::int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", y, m, d, int(rem / 3600),
                  int(rem / 60 % 60), int(rem % 60));
    return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line_no);
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

RideTable read_rides_csv(std::istream& in) {
    static const std::vector<std::string> kColumns = {"user_id", "bike_id", "start_lat",
                                                      "start_lon", "end_lat", "end_lon",
                                                      "start_time", "end_time"};
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("rides file is empty", 1);
    ++line_no;
    auto header = split_csv_line(line, line_no);
    for (auto& h : header) h = trim(h);
    std::vector<std::size_t> col(kColumns.size());
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        auto it = std::find(header.begin(), header.end(), kColumns[c]);
        if (it == header.end()) throw ParseError("missing column '" + kColumns[c] + "'", line_no);
        col[c] = std::size_t(it - header.begin());
    }

    RideTable table;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv_line(line, line_no);
        if (f.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(f.size()),
                             line_no);
        Ride r;
        r.user_id = f[col[0]];
        r.bike_id = f[col[1]];
        double* coords[] = {&r.start_lat, &r.start_lon, &r.end_lat, &r.end_lon};
        for (int c = 0; c < 4; ++c) {
            const std::string t = trim(f[col[2 + c]]);
            if (!parse_number(t, *coords[c]))
                throw ParseError("invalid coordinate '" + t + "'", line_no);
        }
        try {
            r.start_time = parse_iso8601(f[col[6]]);
            r.end_time = parse_iso8601(f[col[7]]);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
        if (r.valid())
            table.rides.push_back(std::move(r));
        else
            ++table.rejected;
    }
    return table;
}

RideTable read_rides_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open rides file " + path.string());
    return read_rides_csv(in);
}

// ---------------------------------------------------------------------------
// Time windows and snapping

bool TimeWindow::contains(std::int64_t timestamp) const {
    std::int64_t tod = timestamp % 86400;
    if (tod < 0) tod += 86400;
    if (begin_s <= end_s) return tod >= begin_s && tod < end_s;
    return tod >= begin_s || tod < end_s;
}

TimeWindow TimeWindow::parse(const std::string& text) {
    if (text == "morning") return morning();
    if (text == "evening") return evening();
    if (text == "all") return {};
    int h0, m0, h1, m1;
    char tail;
    if (std::sscanf(text.c_str(), "%d:%d-%d:%d%c", &h0, &m0, &h1, &m1, &tail) != 4 || h0 < 0 ||
        h0 > 24 || h1 < 0 || h1 > 24 || m0 < 0 || m0 > 59 || m1 < 0 || m1 > 59)
        throw ValidationError("invalid time window '" + text + "' (expected HH:MM-HH:MM)");
    return {h0 * 3600 + m0 * 60, h1 * 3600 + m1 * 60};
}

NodeId snap_local(double north_m, double east_m, const Grid& grid) {
    const double cx = std::floor(east_m / grid.cell_size_m);
    const double cy = std::floor(north_m / grid.cell_size_m);
    if (!(cx >= 0.0 && cy >= 0.0 && cx < grid.n_cols && cy < grid.n_rows))
        throw OutOfAreaError("point outside the grid");
    return grid.cell_id({int(cy), int(cx)});
}

NodeId snap_point(double lat, double lon, const Grid& grid) {
    const auto [n, e] = grid.to_local(lat, lon);
    return snap_local(n, e, grid);
}

// ---------------------------------------------------------------------------
// Construction and pruning

GraphBuild build_graph(std::span<const Ride> rides, const Grid& grid, const TimeWindow& window) {
    grid.validate();
    GraphBuild out;
    auto& diag = out.diagnostics;
    diag.rides_total = rides.size();

    std::map<std::pair<NodeId, NodeId>, std::int64_t> pair_counts;
    for (const Ride& r : rides) {
        if (!window.contains(r.start_time)) continue;
        ++diag.rides_in_window;
        NodeId a, b;
        try {
            a = snap_point(r.start_lat, r.start_lon, grid);
            b = snap_point(r.end_lat, r.end_lon, grid);
        } catch (const OutOfAreaError&) {
            ++diag.rides_out_of_area;
            continue;
        }
        ++pair_counts[{a, b}];
    }
    if (pair_counts.empty())
        throw ValidationError("no rides left after filtering by time window and service area");

    std::map<NodeId, std::int64_t> origin_counts;
    std::set<NodeId> all_cells;
    for (const auto& [key, count] : pair_counts) {
        origin_counts[key.first] += count;
        all_cells.insert(key.first);
        all_cells.insert(key.second);
    }

    std::vector<Edge> edges;
    edges.reserve(pair_counts.size());
    for (const auto& [key, count] : pair_counts)
        edges.push_back({key.first, key.second, double(count) / double(origin_counts[key.first])});
    std::map<NodeId, CellCoord> cells;
    for (NodeId c : all_cells) {
        cells.emplace(c, grid.coord(c));
        if (!origin_counts.count(c)) {
            edges.push_back({c, c, 1.0});
            ++diag.destination_only_cells;
        }
    }
    out.graph = MobilityGraph::from_edges({all_cells.begin(), all_cells.end()}, edges, cells);
    return out;
}

MobilityGraph prune_graph(const MobilityGraph& g, double eta) {
    if (!(eta >= 0.0 && eta < 1.0)) throw ValidationError("pruning threshold must lie in [0, 1)");
    const std::size_t n = g.node_count();

    // Per node: kept non-self arcs and accumulated self-loop mass.
    std::vector<std::vector<Arc>> kept(n);
    std::vector<double> self(n, 0.0);
    for (NodeIndex u = 0; u < n; ++u) {
        for (const Arc& a : g.out_arcs(u)) {
            if (a.node == u || a.probability < eta)
                self[u] += a.probability;
            else
                kept[u].push_back(a);
        }
    }

    std::vector<bool> alive(n, true);
    for (bool changed = true; changed;) {
        changed = false;
        for (NodeIndex u = 0; u < n; ++u) {
            if (!alive[u]) continue;
            auto& arcs = kept[u];
            auto dead = std::stable_partition(arcs.begin(), arcs.end(),
                                              [&](const Arc& a) { return alive[a.node]; });
            for (auto it = dead; it != arcs.end(); ++it) self[u] += it->probability;
            arcs.erase(dead, arcs.end());
            if (arcs.empty()) {
                alive[u] = false;
                changed = true;
            }
        }
    }

    std::vector<NodeId> nodes;
    std::vector<Edge> edges;
    std::map<NodeId, CellCoord> cells;
    for (NodeIndex u = 0; u < n; ++u) {
        if (!alive[u]) continue;
        nodes.push_back(g.id(u));
        if (auto c = g.cell(u)) cells.emplace(g.id(u), *c);
        if (self[u] > 0.0) edges.push_back({g.id(u), g.id(u), self[u]});
        for (const Arc& a : kept[u]) edges.push_back({g.id(u), g.id(a.node), a.probability});
    }
    return MobilityGraph::from_edges(std::move(nodes), edges, cells);
}

// ---------------------------------------------------------------------------
// Graph files

void write_graph(std::ostream& out, const MobilityGraph& g, const std::string& comment) {
    out << g.node_count() << ' ' << g.edge_count() << '\n';
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        const auto c = g.cell(i);
        out << "N " << g.id(i) << ' ' << (c ? c->row : -1) << ' ' << (c ? c->col : -1) << '\n';
    }
    for (const Edge& e : g.edges())
        out << "E " << e.src << ' ' << e.dst << ' ' << format_probability(e.probability) << '\n';
    if (!comment.empty()) {
        std::istringstream lines(comment);
        for (std::string l; std::getline(lines, l);) out << "# " << l << '\n';
    }
}

MobilityGraph read_graph(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t n = 0, m = 0;
    bool have_header = false;
    std::vector<NodeId> nodes;
    std::map<NodeId, CellCoord> cells;
    std::vector<Edge> edges;
    std::set<std::pair<NodeId, NodeId>> seen;
    std::set<NodeId> node_set;

    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        std::istringstream ss(line);
        if (!have_header) {
            long long nn, mm;
            std::string extra;
            if (!(ss >> nn >> mm) || (ss >> extra) || nn < 0 || mm < 0)
                throw ParseError("expected header 'n m'", line_no);
            n = std::size_t(nn);
            m = std::size_t(mm);
            have_header = true;
            continue;
        }
        std::string tag;
        ss >> tag;
        std::string extra;
        if (tag == "N") {
            NodeId id;
            int row, col;
            if (!(ss >> id >> row >> col) || (ss >> extra))
                throw ParseError("expected 'N <node_id> <row> <col>'", line_no);
            if (!node_set.insert(id).second)
                throw ParseError("duplicate node " + std::to_string(id), line_no);
            if (!edges.empty()) throw ParseError("node record after edge records", line_no);
            nodes.push_back(id);
            if (row >= 0 && col >= 0) cells.emplace(id, CellCoord{row, col});
        } else if (tag == "E") {
            Edge e;
            std::string p_text;
            if (!(ss >> e.src >> e.dst >> p_text) || (ss >> extra) ||
                !parse_number(p_text, e.probability))
                throw ParseError("expected 'E <src> <dst> <p>'", line_no);
            if (!node_set.count(e.src) || !node_set.count(e.dst))
                throw ParseError("edge references an undeclared node", line_no);
            if (!(e.probability > 0.0 && e.probability <= 1.0 + Tolerances::unity))
                throw ParseError("edge probability outside (0, 1]", line_no);
            if (!seen.insert({e.src, e.dst}).second)
                throw ParseError("duplicate edge " + std::to_string(e.src) + " -> " +
                                     std::to_string(e.dst),
                                 line_no);
            edges.push_back(e);
        } else {
            throw ParseError("unknown record '" + tag + "'", line_no);
        }
    }
    if (!have_header) throw ParseError("missing header line", line_no);
    if (nodes.size() != n)
        throw ParseError("header declares " + std::to_string(n) + " nodes, found " +
                         std::to_string(nodes.size()));
    if (edges.size() != m)
        throw ParseError("header declares " + std::to_string(m) + " edges, found " +
                         std::to_string(edges.size()));
    try {
        return MobilityGraph::from_edges(std::move(nodes), edges, cells);
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    }
}

void save_graph(const MobilityGraph& g, const std::filesystem::path& path,
                const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    write_graph(out, g, comment);
    if (!out) throw ValidationError("failed writing " + path.string());
}

MobilityGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open graph file " + path.string());
    return read_graph(in);
}

MobilityGraph read_edge_list(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::set<NodeId> node_set;
    std::set<std::pair<NodeId, NodeId>> seen;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_comment_or_blank(line)) continue;
        std::istringstream ss(line);
        Edge e;
        if (!(ss >> e.src >> e.dst)) throw ParseError("expected 'src dst p'", line_no);
        std::string rest;
        std::getline(ss, rest);
        // Accept a bare number or the first number inside a {'weight': p} dict.
        const auto start = rest.find_first_of("0123456789.-");
        if (start == std::string::npos) throw ParseError("missing probability", line_no);
        auto stop = rest.find_first_not_of("0123456789.eE+-", start);
        const std::string num = rest.substr(start, stop == std::string::npos ? stop : stop - start);
        if (!parse_number(num, e.probability)) throw ParseError("invalid probability", line_no);
        if (!seen.insert({e.src, e.dst}).second)
            throw ParseError("duplicate edge " + std::to_string(e.src) + " -> " +
                                 std::to_string(e.dst),
                             line_no);
        node_set.insert(e.src);
        node_set.insert(e.dst);
        edges.push_back(e);
    }
    try {
        return MobilityGraph::from_edges({node_set.begin(), node_set.end()}, edges);
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    }
}

MobilityGraph load_any_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open graph file " + path.string());
    std::vector<std::string> head;
    for (std::string line; head.size() < 2 && std::getline(in, line);)
        if (!is_comment_or_blank(line)) head.push_back(trim(line));
    bool native = false;
    if (!head.empty()) {
        std::istringstream ss(head[0]);
        long long a, b;
        std::string extra;
        native = (ss >> a >> b) && !(ss >> extra) &&
                 (head.size() < 2 || head[1].rfind("N ", 0) == 0 || head[1].rfind("E ", 0) == 0);
    }
    in.clear();
    in.seekg(0);
    return native ? read_graph(in) : read_edge_list(in);
}

}  // namespace bikeflow
