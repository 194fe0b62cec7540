use super::{Mesh, RegionTag};
use crate::{Error, Result};

/// Tensor grid through a set of break lines, each interval subdivided
/// uniformly, with one region tag per coarse cell.
///
/// `cell_tags` is indexed `iz * (r_breaks.len() - 1) + ir`.
#[derive(Debug, Clone)]
pub struct TensorLayout {
    pub r_breaks: Vec<f64>,
    pub z_breaks: Vec<f64>,
    pub r_divisions: Vec<usize>,
    pub z_divisions: Vec<usize>,
    pub cell_tags: Vec<RegionTag>,
}

impl TensorLayout {
    pub fn build(&self) -> Result<Mesh> {
        let nrc = self.r_breaks.len().saturating_sub(1);
        let nzc = self.z_breaks.len().saturating_sub(1);
        if nrc == 0 || nzc == 0 {
            return Err(Error::DegenerateGeometry("need at least one cell".into()));
        }
        if self.r_divisions.len() != nrc
            || self.z_divisions.len() != nzc
            || self.cell_tags.len() != nrc * nzc
        {
            return Err(Error::Dimension("tensor layout sizes disagree".into()));
        }
        for w in self.r_breaks.windows(2).chain(self.z_breaks.windows(2)) {
            if !(w[1] > w[0]) {
                return Err(Error::DegenerateGeometry(format!(
                    "break lines not strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if self
            .r_divisions
            .iter()
            .chain(&self.z_divisions)
            .any(|&d| d == 0)
        {
            return Err(Error::DegenerateGeometry("zero subdivisions".into()));
        }

        let rs = subdivide(&self.r_breaks, &self.r_divisions);
        let zs = subdivide(&self.z_breaks, &self.z_divisions);
        // cell index of each fine interval
        let r_cell = owner(&self.r_divisions);
        let z_cell = owner(&self.z_divisions);

        let nr = rs.len();
        let nz = zs.len();
        let mut nodes = Vec::with_capacity(nr * nz);
        let mut boundary = Vec::with_capacity(nr * nz);
        for (j, &z) in zs.iter().enumerate() {
            for (i, &r) in rs.iter().enumerate() {
                nodes.push([r, z]);
                boundary.push(i == 0 || j == 0 || i == nr - 1 || j == nz - 1);
            }
        }
        let id = |i: usize, j: usize| j * nr + i;
        let mut triangles = Vec::with_capacity(2 * (nr - 1) * (nz - 1));
        let mut tags = Vec::with_capacity(triangles.capacity());
        for j in 0..nz - 1 {
            for i in 0..nr - 1 {
                let tag = self.cell_tags[z_cell[j] * nrc + r_cell[i]];
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
                tags.push(tag);
                tags.push(tag);
            }
        }
        Mesh::new(nodes, triangles, tags, boundary)
    }
}

fn subdivide(breaks: &[f64], divs: &[usize]) -> Vec<f64> {
    let mut out = vec![breaks[0]];
    for (w, &n) in breaks.windows(2).zip(divs) {
        for k in 1..n {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
        }
        out.push(w[1]);
    }
    out
}

fn owner(divs: &[usize]) -> Vec<usize> {
    divs.iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat(c).take(n))
        .collect()
}

/// Cross-section of the gapped pot-core inductor with a foil winding in its
/// window. All lengths in metres.
///
/// The core is the rectangle `[0, yoke_outer_radius] × [0, yoke_height]`
/// minus the winding window; the centre limb is interrupted by the air gap
/// at mid-height and the winding is centred vertically in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySpec {
    pub yoke_outer_radius: f64,
    pub yoke_height: f64,
    pub air_gap: f64,
    /// Radius of the centre limb.
    pub limb_radius: f64,
    /// Thickness of the top and bottom plates.
    pub plate_thickness: f64,
    /// Radial width of the outer limb.
    pub outer_limb_width: f64,
    pub winding_inner_radius: f64,
    /// Radial thickness of the winding, `N · b`.
    pub winding_thickness: f64,
    pub winding_height: f64,
}

impl Default for GeometrySpec {
    /// The reference inductor: 40 mm outer radius, 76.2 mm height, 4.2 mm gap,
    /// 50 foils of 0.28 mm pitch and 50 mm height. Limb, plate and window
    /// dimensions follow the drawing of the reference set-up.
    fn default() -> Self {
        GeometrySpec {
            yoke_outer_radius: 40e-3,
            yoke_height: 76.2e-3,
            air_gap: 4.2e-3,
            limb_radius: 9.9e-3,
            plate_thickness: 9.9e-3,
            outer_limb_width: 10.45e-3,
            winding_inner_radius: 12.6e-3,
            winding_thickness: 50.0 * 0.28e-3,
            winding_height: 50e-3,
        }
    }
}

/// Preset target edge lengths for the reference geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshLevel {
    /// About a hundred nodes.
    Coarse,
    /// About fourteen hundred nodes.
    Fine,
}

impl MeshLevel {
    pub fn edge_length(self) -> f64 {
        match self {
            MeshLevel::Coarse => 8.0e-3,
            MeshLevel::Fine => 1.7e-3,
        }
    }
}

impl GeometrySpec {
    pub fn window_outer_radius(&self) -> f64 {
        self.yoke_outer_radius - self.outer_limb_width
    }

    pub fn winding_outer_radius(&self) -> f64 {
        self.winding_inner_radius + self.winding_thickness
    }

    /// `(z_min, z_max)` of the winding.
    pub fn winding_z(&self) -> (f64, f64) {
        let mid = 0.5 * self.yoke_height;
        (
            mid - 0.5 * self.winding_height,
            mid + 0.5 * self.winding_height,
        )
    }

    pub fn gap_z(&self) -> (f64, f64) {
        let mid = 0.5 * self.yoke_height;
        (mid - 0.5 * self.air_gap, mid + 0.5 * self.air_gap)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.yoke_outer_radius,
            self.yoke_height,
            self.air_gap,
            self.limb_radius,
            self.plate_thickness,
            self.outer_limb_width,
            self.winding_inner_radius,
            self.winding_thickness,
            self.winding_height,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::DegenerateGeometry(
                "all dimensions must be positive".into(),
            ));
        }
        let (wz0, wz1) = self.winding_z();
        let (gz0, gz1) = self.gap_z();
        let win_top = self.yoke_height - self.plate_thickness;
        if !(self.limb_radius < self.winding_inner_radius
            && self.winding_outer_radius() < self.window_outer_radius())
        {
            return Err(Error::DegenerateGeometry(
                "winding not strictly inside the window radially".into(),
            ));
        }
        if !(self.plate_thickness < wz0 && wz1 < win_top) {
            return Err(Error::DegenerateGeometry(
                "winding not strictly inside the window axially".into(),
            ));
        }
        if !(self.plate_thickness < gz0 && gz1 < win_top) {
            return Err(Error::DegenerateGeometry(
                "air gap must lie inside the limb".into(),
            ));
        }
        Ok(())
    }

    /// Region of a point strictly inside one of the layout cells.
    fn region_at(&self, r: f64, z: f64) -> RegionTag {
        let (wz0, wz1) = self.winding_z();
        let (gz0, gz1) = self.gap_z();
        let in_window = r > self.limb_radius
            && r < self.window_outer_radius()
            && z > self.plate_thickness
            && z < self.yoke_height - self.plate_thickness;
        if r > self.winding_inner_radius && r < self.winding_outer_radius() && z > wz0 && z < wz1 {
            RegionTag::FoilWinding
        } else if in_window {
            RegionTag::Air
        } else if r < self.limb_radius && z > gz0 && z < gz1 {
            RegionTag::AirGap
        } else {
            RegionTag::Yoke
        }
    }

    /// The tensor layout for target edge length `h`: each feature interval is
    /// split into `ceil(len / h)` pieces, the winding radially into at least
    /// two.
    pub fn layout(&self, h: f64) -> Result<TensorLayout> {
        self.validate()?;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "edge length {h} must be positive"
            )));
        }
        let (wz0, wz1) = self.winding_z();
        let (gz0, gz1) = self.gap_z();
        let mut r_breaks = vec![
            0.0,
            self.limb_radius,
            self.winding_inner_radius,
            self.winding_outer_radius(),
            self.window_outer_radius(),
            self.yoke_outer_radius,
        ];
        let mut z_breaks = vec![
            0.0,
            self.plate_thickness,
            wz0,
            gz0,
            gz1,
            wz1,
            self.yoke_height - self.plate_thickness,
            self.yoke_height,
        ];
        r_breaks.sort_by(f64::total_cmp);
        z_breaks.sort_by(f64::total_cmp);
        let divs = |b: &[f64]| -> Vec<usize> {
            b.windows(2)
                .map(|w| (((w[1] - w[0]) / h) - 1e-9).ceil().max(1.0) as usize)
                .collect()
        };
        let mut r_divisions = divs(&r_breaks);
        let z_divisions = divs(&z_breaks);
        let wi = r_breaks
            .iter()
            .position(|&r| r == self.winding_inner_radius)
            .expect("winding break present");
        r_divisions[wi] = r_divisions[wi].max(2);

        let nrc = r_breaks.len() - 1;
        let mut cell_tags = Vec::with_capacity(nrc * (z_breaks.len() - 1));
        for zw in z_breaks.windows(2) {
            for rw in r_breaks.windows(2) {
                cell_tags.push(self.region_at(0.5 * (rw[0] + rw[1]), 0.5 * (zw[0] + zw[1])));
            }
        }
        Ok(TensorLayout {
            r_breaks,
            z_breaks,
            r_divisions,
            z_divisions,
            cell_tags,
        })
    }

    pub fn generate(&self, h: f64) -> Result<Mesh> {
        let mesh = self.layout(h)?.build()?;
        let areas = mesh.region_areas();
        for tag in RegionTag::ALL {
            if areas.get(&tag).copied().unwrap_or(0.0) <= 0.0 {
                return Err(Error::DegenerateGeometry(format!("region {tag} collapsed")));
            }
        }
        Ok(mesh)
    }

    pub fn generate_level(&self, level: MeshLevel) -> Result<Mesh> {
        self.generate(level.edge_length())
    }

    /// Exact `(r, z)` area of every region.
    pub fn analytic_areas(&self) -> [(RegionTag, f64); 4] {
        let window = (self.window_outer_radius() - self.limb_radius)
            * (self.yoke_height - 2.0 * self.plate_thickness);
        let winding = self.winding_thickness * self.winding_height;
        let gap = self.limb_radius * self.air_gap;
        let total = self.yoke_outer_radius * self.yoke_height;
        [
            (RegionTag::Air, window - winding),
            (RegionTag::Yoke, total - window - gap),
            (RegionTag::AirGap, gap),
            (RegionTag::FoilWinding, winding),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_square() {
        let m = Mesh::rectangle(0.0, 0.0, 1.0, 1.0, 1, 1, RegionTag::Air).unwrap();
        assert_eq!(m.n_nodes(), 4);
        assert_eq!(m.n_triangles(), 2);
        assert!(m.boundary().iter().all(|&b| b));
    }

    #[test]
    fn region_areas_match_geometry() {
        let g = GeometrySpec::default();
        let m = g.generate(3e-3).unwrap();
        let areas = m.region_areas();
        for (tag, exact) in g.analytic_areas() {
            let got = areas[&tag];
            assert!(
                (got - exact).abs() <= 1e-12 * exact,
                "{tag}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn node_count_monotone_in_h() {
        let g = GeometrySpec::default();
        let mut last = usize::MAX;
        for k in 1..=20 {
            let h = 0.5e-3 * k as f64;
            let n = g.generate(h).unwrap().n_nodes();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn winding_has_two_radial_elements_even_when_coarse() {
        let g = GeometrySpec::default();
        let layout = g.layout(1.0).unwrap();
        let wi = layout
            .r_breaks
            .iter()
            .position(|&r| r == g.winding_inner_radius)
            .unwrap();
        assert!(layout.r_divisions[wi] >= 2);
    }

    #[test]
    fn preset_node_counts() {
        let g = GeometrySpec::default();
        let coarse = g.generate_level(MeshLevel::Coarse).unwrap().n_nodes();
        let fine = g.generate_level(MeshLevel::Fine).unwrap().n_nodes();
        assert!((80..=150).contains(&coarse), "coarse has {coarse} nodes");
        assert!((1200..=1600).contains(&fine), "fine has {fine} nodes");
    }

    #[test]
    fn bad_geometry_rejected() {
        let g = GeometrySpec {
            winding_thickness: 30e-3,
            ..GeometrySpec::default()
        };
        assert!(matches!(
            g.generate(2e-3),
            Err(Error::DegenerateGeometry(_))
        ));
    }
}
