use std::collections::HashMap;

use super::Mesh;

/// Splits every triangle into four by its edge midpoints.
///
/// New nodes are numbered after the old ones in order of first encounter
/// (triangle order, edges 01, 12, 20). A midpoint is a boundary node iff its
/// edge lies on the boundary, i.e. both ends are boundary nodes and the edge
/// belongs to a single triangle.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let counts = mesh.edge_counts();
    let mut nodes = mesh.nodes().to_vec();
    let mut boundary = mesh.boundary().to_vec();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::with_capacity(counts.len());
    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    let mut tags = Vec::with_capacity(4 * mesh.n_triangles());

    for (tri, &tag) in mesh.triangles().iter().zip(mesh.tags()) {
        let mut m = [0usize; 3];
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            m[k] = *mid.entry(key).or_insert_with(|| {
                let (p, q) = (mesh.nodes()[a], mesh.nodes()[b]);
                nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                boundary.push(mesh.boundary()[a] && mesh.boundary()[b] && counts[&key] == 1);
                nodes.len() - 1
            });
        }
        let [a, b, c] = *tri;
        let [ab, bc, ca] = m;
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        tags.extend([tag; 4]);
    }
    Mesh::new(nodes, triangles, tags, boundary).expect("refinement of a valid mesh is valid")
}
