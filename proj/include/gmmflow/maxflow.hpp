#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace gmm {

/// Dinic max-flow on real capacities. Node 0 is the source, node 1 the sink.
class MaxFlow {
  public:
    explicit MaxFlow(int nodes) : head_(static_cast<std::size_t>(nodes), -1) {}

    int source() const { return 0; }
    int sink() const { return 1; }

    void add_edge(int u, int v, double cap_uv, double cap_vu = 0.0) {
        arcs_.push_back({v, head_[static_cast<std::size_t>(u)], cap_uv});
        head_[static_cast<std::size_t>(u)] = static_cast<int>(arcs_.size()) - 1;
        arcs_.push_back({u, head_[static_cast<std::size_t>(v)], cap_vu});
        head_[static_cast<std::size_t>(v)] = static_cast<int>(arcs_.size()) - 1;
    }

    double run() {
        double flow = 0.0;
        while (bfs()) {
            cur_ = head_;
            double f;
            while ((f = dfs(source(), std::numeric_limits<double>::infinity())) > eps_) flow += f;
        }
        return flow;
    }

    /// After run(): true if the node is on the source side of the min cut.
    bool source_side(int v) const { return level_[static_cast<std::size_t>(v)] >= 0; }

  private:
    struct Arc {
        int to, next;
        double cap;
    };

    bool bfs() {
        level_.assign(head_.size(), -1);
        std::queue<int> q;
        q.push(source());
        level_[static_cast<std::size_t>(source())] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int a = head_[static_cast<std::size_t>(u)]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
                const Arc& arc = arcs_[static_cast<std::size_t>(a)];
                if (arc.cap > eps_ && level_[static_cast<std::size_t>(arc.to)] < 0) {
                    level_[static_cast<std::size_t>(arc.to)] = level_[static_cast<std::size_t>(u)] + 1;
                    q.push(arc.to);
                }
            }
        }
        return level_[static_cast<std::size_t>(sink())] >= 0;
    }

    double dfs(int u, double limit) {
        if (u == sink()) return limit;
        for (int& a = cur_[static_cast<std::size_t>(u)]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
            Arc& arc = arcs_[static_cast<std::size_t>(a)];
            if (arc.cap > eps_ && level_[static_cast<std::size_t>(arc.to)] == level_[static_cast<std::size_t>(u)] + 1) {
                double f = dfs(arc.to, std::min(limit, arc.cap));
                if (f > eps_) {
                    arc.cap -= f;
                    arcs_[static_cast<std::size_t>(a ^ 1)].cap += f;
                    return f;
                }
            }
        }
        level_[static_cast<std::size_t>(u)] = -2;  // dead end
        return 0.0;
    }

    static constexpr double eps_ = 1e-11;
    std::vector<int> head_, cur_, level_;
    std::vector<Arc> arcs_;
};

/// Pseudo-boolean energy minimizer for pairwise submodular terms
/// (Kolmogorov-Zabih graph construction). Variable value 1 is the
/// source side of the cut.
class BinarySubmodular {
  public:
    explicit BinarySubmodular(int vars)
        : n_(vars), f0_(static_cast<std::size_t>(vars), 0.0), f1_(f0_) {}

    void add_unary(int i, double e0, double e1) {
        f0_[static_cast<std::size_t>(i)] += e0;
        f1_[static_cast<std::size_t>(i)] += e1;
    }

    /// Requires e01 + e10 >= e00 + e11.
    void add_pairwise(int i, int j, double e00, double e01, double e10, double e11) {
        constant_ += e00;
        f1_[static_cast<std::size_t>(i)] += e10 - e00;
        f1_[static_cast<std::size_t>(j)] += e11 - e10;
        double cap = e01 + e10 - e00 - e11;
        if (cap > 0.0) pair_arcs_.push_back({i, j, cap});
    }

    /// Minimizes and writes the argmin into x; returns the minimum energy.
    double solve(std::vector<char>& x) {
        MaxFlow mf(n_ + 2);
        for (int i = 0; i < n_; ++i) {
            double e0 = f0_[static_cast<std::size_t>(i)], e1 = f1_[static_cast<std::size_t>(i)];
            constant_ += std::min(e0, e1);
            if (e0 > e1)
                mf.add_edge(mf.source(), i + 2, e0 - e1);  // paid when i ends on sink side (x=0)
            else if (e1 > e0)
                mf.add_edge(i + 2, mf.sink(), e1 - e0);
        }
        // cost paid when x_i = 0 and x_j = 1: arc from j (source side) to i
        for (const auto& a : pair_arcs_) mf.add_edge(a.j + 2, a.i + 2, a.cap);
        double flow = mf.run();
        x.assign(static_cast<std::size_t>(n_), 0);
        for (int i = 0; i < n_; ++i) x[static_cast<std::size_t>(i)] = mf.source_side(i + 2) ? 1 : 0;
        return constant_ + flow;
    }

  private:
    struct PairArc {
        int i, j;
        double cap;
    };
    int n_;
    double constant_ = 0.0;
    std::vector<double> f0_, f1_;
    std::vector<PairArc> pair_arcs_;
};

}  // namespace gmm
