#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace glt_stokes {

// Grid node in integer units of 1/(4n); every P2 node of the crisscross
// mesh lands on this lattice, so ordering comparisons are exact.
struct Node {
    int x = 0, y = 0;
    friend bool operator==(const Node&, const Node&) = default;
};

// y-major lexicographic order
inline bool lex_less(const Node& a, const Node& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
}

struct StructuredMesh {
    int n = 0;
    std::vector<Node> vertices;              // sorted lexicographically, equals pressure order
    std::vector<std::array<int, 3>> triangles;  // counterclockwise
    std::vector<int> cell_order;             // square index per triangle
    std::vector<Node> velocity_dofs;         // interior P2 nodes
    std::vector<Node> pressure_dofs;

    int units() const { return 4 * n; }
    double coord(int k) const { return double(k) / units(); }
    int velocity_count() const { return int(velocity_dofs.size()); }
    int pressure_count() const { return int(pressure_dofs.size()); }

    // lattice node -> dof index, -1 when the node is not a dof
    int velocity_index(Node p) const { return lookup(vel_lookup_, p); }
    int pressure_index(Node p) const { return lookup(pre_lookup_, p); }

    // the six P2 nodes of triangle t: vertices then midpoints of edges 01, 12, 20
    std::array<Node, 6> p2_nodes(int t) const {
        const auto& tri = triangles[t];
        Node a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
        auto mid = [](Node p, Node q) { return Node{(p.x + q.x) / 2, (p.y + q.y) / 2}; };
        return {a, b, c, mid(a, b), mid(b, c), mid(c, a)};
    }

    std::vector<int> vel_lookup_, pre_lookup_;

private:
    int lookup(const std::vector<int>& tab, Node p) const {
        const int q = units();
        if (p.x < 0 || p.y < 0 || p.x > q || p.y > q) return -1;
        return tab[std::size_t(p.y) * (q + 1) + p.x];
    }
};

inline std::int64_t velocity_count(std::int64_t n) { return 8 * n * n - 4 * n + 1; }
inline std::int64_t pressure_count(std::int64_t n) { return 2 * n * n + 2 * n + 1; }

inline std::int64_t saddle_dimension(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("grid parameter n must be >= 1");
    return 18 * n * n - 6 * n + 3;
}

inline StructuredMesh build_mesh(int n) {
    if (n < 1) throw std::invalid_argument("grid parameter n must be >= 1");
    StructuredMesh m;
    m.n = n;
    const int q = 4 * n;
    const std::size_t side = std::size_t(q) + 1;

    // vertices come out lexicographic by construction: scan y then x
    std::vector<int> vid(side * side, -1);
    for (int y = 0; y <= q; y += 2)
        for (int x = 0; x <= q; x += 2) {
            bool grid = x % 4 == 0 && y % 4 == 0;
            bool centre = x % 4 == 2 && y % 4 == 2;
            if (!grid && !centre) continue;
            vid[std::size_t(y) * side + x] = int(m.vertices.size());
            m.vertices.push_back({x, y});
        }
    auto v = [&](int x, int y) { return vid[std::size_t(y) * side + x]; };

    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            int x0 = 4 * i, y0 = 4 * j, cell = j * n + i;
            int ll = v(x0, y0), lr = v(x0 + 4, y0), ur = v(x0 + 4, y0 + 4),
                ul = v(x0, y0 + 4), c = v(x0 + 2, y0 + 2);
            // south, west, east, north
            for (auto t : {std::array{ll, lr, c}, std::array{ul, ll, c},
                           std::array{lr, ur, c}, std::array{ur, ul, c}}) {
                m.triangles.push_back(t);
                m.cell_order.push_back(cell);
            }
        }

    m.pressure_dofs = m.vertices;
    m.pre_lookup_ = vid;

    std::vector<char> is_node(side * side, 0);
    for (int t = 0; t < int(m.triangles.size()); ++t)
        for (Node p : m.p2_nodes(t)) is_node[std::size_t(p.y) * side + p.x] = 1;
    m.vel_lookup_.assign(side * side, -1);
    for (int y = 1; y < q; ++y)
        for (int x = 1; x < q; ++x)
            if (is_node[std::size_t(y) * side + x]) {
                m.vel_lookup_[std::size_t(y) * side + x] = int(m.velocity_dofs.size());
                m.velocity_dofs.push_back({x, y});
            }

    if (m.velocity_count() != velocity_count(n) || m.pressure_count() != pressure_count(n))
        throw std::logic_error("crisscross dof count does not match the closed form");
    return m;
}

inline double signed_area(const StructuredMesh& m, int t) {
    const auto& tri = m.triangles[t];
    Node a = m.vertices[tri[0]], b = m.vertices[tri[1]], c = m.vertices[tri[2]];
    double s = m.units();
    return 0.5 * (double(b.x - a.x) * (c.y - a.y) - double(c.x - a.x) * (b.y - a.y)) / (s * s);
}

// `v ix iy den` / `t v1 v2 v3`, vertex coordinates as multiples of 1/(2n)
inline void dump_mesh(const StructuredMesh& m, std::ostream& os) {
    for (Node p : m.vertices) os << "v " << p.x / 2 << ' ' << p.y / 2 << ' ' << 2 * m.n << '\n';
    for (const auto& t : m.triangles) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace glt_stokes
