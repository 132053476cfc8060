//! Voxel-grid containers shared by every other module.
//!
//! All grids use the same conventions:
//! * linear memory is x-fastest: `index = x + nx * (y + ny * z)`,
//! * the physical position of voxel `(x, y, z)` is `origin + index * spacing`
//!   (voxel centers, millimeters).

use crate::error::{Error, Result};

/// The three orthogonal slicing directions of a volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    /// Sagittal: slices perpendicular to the x axis.
    X,
    /// Coronal: slices perpendicular to the y axis.
    Y,
    /// Axial: slices perpendicular to the z axis.
    Z,
}

impl View {
    pub const ALL: [View; 3] = [View::X, View::Y, View::Z];

    /// Index of the slicing axis (0, 1, 2).
    pub fn axis(self) -> usize {
        match self {
            View::X => 0,
            View::Y => 1,
            View::Z => 2,
        }
    }

    /// The two in-plane axes, in ascending axis order.
    pub fn in_plane_axes(self) -> (usize, usize) {
        match self {
            View::X => (1, 2),
            View::Y => (0, 2),
            View::Z => (0, 1),
        }
    }
}

impl std::fmt::Display for View {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            View::X => write!(f, "x"),
            View::Y => write!(f, "y"),
            View::Z => write!(f, "z"),
        }
    }
}

/// Grid placement: voxel counts, physical spacing and origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub dims: (usize, usize, usize),
    /// Millimeters per voxel along each axis. Strictly positive.
    pub spacing: (f64, f64, f64),
    /// Physical position of voxel (0, 0, 0) in millimeters.
    pub origin: (f64, f64, f64),
}

impl Geometry {
    pub fn new(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        origin: (f64, f64, f64),
    ) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 {
            return Err(Error::InvalidVolume(format!(
                "dims must all be >= 1, got {dims:?}"
            )));
        }
        if !(spacing.0 > 0.0 && spacing.1 > 0.0 && spacing.2 > 0.0)
            || !spacing.0.is_finite()
            || !spacing.1.is_finite()
            || !spacing.2.is_finite()
        {
            return Err(Error::InvalidVolume(format!(
                "spacing must be positive and finite, got {spacing:?}"
            )));
        }
        Ok(Geometry {
            dims,
            spacing,
            origin,
        })
    }

    /// Isotropic grid at `spacing` mm with origin 0.
    pub fn isotropic(dims: (usize, usize, usize), spacing: f64) -> Result<Self> {
        Geometry::new(dims, (spacing, spacing, spacing), (0.0, 0.0, 0.0))
    }

    pub fn num_voxels(&self) -> usize {
        self.dims.0 * self.dims.1 * self.dims.2
    }

    pub fn contains(&self, index: (usize, usize, usize)) -> bool {
        index.0 < self.dims.0 && index.1 < self.dims.1 && index.2 < self.dims.2
    }

    #[inline]
    pub fn linear(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims.0 * (y + self.dims.1 * z)
    }

    /// Inverse of [`Geometry::linear`].
    #[inline]
    pub fn unlinear(&self, i: usize) -> (usize, usize, usize) {
        let x = i % self.dims.0;
        let r = i / self.dims.0;
        (x, r % self.dims.1, r / self.dims.1)
    }

    /// Physical position (mm) of a voxel center.
    pub fn position(&self, index: (usize, usize, usize)) -> (f64, f64, f64) {
        (
            self.origin.0 + index.0 as f64 * self.spacing.0,
            self.origin.1 + index.1 as f64 * self.spacing.1,
            self.origin.2 + index.2 as f64 * self.spacing.2,
        )
    }

    pub(crate) fn ensure_matches(&self, other: &Geometry, context: &'static str) -> Result<()> {
        if self != other {
            return Err(Error::GeometryMismatch {
                context,
                left: format!("{self:?}"),
                right: format!("{other:?}"),
            });
        }
        Ok(())
    }
}

/// 3D grid of scalar intensities (the CT-like volume).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarVolume {
    pub geometry: Geometry,
    pub data: Vec<f32>,
}

impl ScalarVolume {
    pub fn new(geometry: Geometry, data: Vec<f32>) -> Result<Self> {
        if data.len() != geometry.num_voxels() {
            return Err(Error::InvalidVolume(format!(
                "data length {} != voxel count {}",
                data.len(),
                geometry.num_voxels()
            )));
        }
        Ok(ScalarVolume { geometry, data })
    }

    pub fn filled(geometry: Geometry, value: f32) -> Self {
        let n = geometry.num_voxels();
        ScalarVolume {
            geometry,
            data: vec![value; n],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.geometry.dims
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> f32 {
        self.data[self.geometry.linear(x, y, z)]
    }

    /// Min and max intensity. `(0, 0)` convention for empty never occurs
    /// because geometry forbids empty volumes.
    pub fn intensity_range(&self) -> (f32, f32) {
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Trilinear sample at a continuous voxel-space coordinate, with
    /// out-of-range coordinates clamped to the grid edge.
    ///
    /// Coordinates within 1e-9 of an integer lattice point are snapped to it,
    /// so sampling exactly on the lattice reproduces stored values bit for bit.
    pub fn sample_clamped(&self, u: f64, v: f64, w: f64) -> f64 {
        let (nx, ny, nz) = self.geometry.dims;
        let (iu, fu) = split_coord(u, nx);
        let (iv, fv) = split_coord(v, ny);
        let (iw, fw) = split_coord(w, nz);

        let ju = (iu + 1).min(nx - 1);
        let jv = (iv + 1).min(ny - 1);
        let jw = (iw + 1).min(nz - 1);

        let f = |x: usize, y: usize, z: usize| self.data[self.geometry.linear(x, y, z)] as f64;

        let c00 = f(iu, iv, iw) * (1.0 - fu) + f(ju, iv, iw) * fu;
        let c10 = f(iu, jv, iw) * (1.0 - fu) + f(ju, jv, iw) * fu;
        let c01 = f(iu, iv, jw) * (1.0 - fu) + f(ju, iv, jw) * fu;
        let c11 = f(iu, jv, jw) * (1.0 - fu) + f(ju, jv, jw) * fu;
        let c0 = c00 * (1.0 - fv) + c10 * fv;
        let c1 = c01 * (1.0 - fv) + c11 * fv;
        c0 * (1.0 - fw) + c1 * fw
    }

    /// Trilinear sample at a physical position (mm), edge-clamped.
    pub fn sample_physical(&self, x: f64, y: f64, z: f64) -> f64 {
        let u = (x - self.geometry.origin.0) / self.geometry.spacing.0;
        let v = (y - self.geometry.origin.1) / self.geometry.spacing.1;
        let w = (z - self.geometry.origin.2) / self.geometry.spacing.2;
        self.sample_clamped(u, v, w)
    }
}

/// Clamp a continuous coordinate to `[0, n-1]`, snap near-integers, and
/// split into cell index plus fractional offset.
#[inline]
fn split_coord(u: f64, n: usize) -> (usize, f64) {
    let max = (n - 1) as f64;
    let mut u = u.clamp(0.0, max);
    let r = u.round();
    if (u - r).abs() < 1e-9 {
        u = r;
    }
    let i = (u.floor() as usize).min(n - 1);
    (i, u - i as f64)
}

/// Resample a volume onto an isotropic grid at `target` mm per voxel.
///
/// The output keeps the input origin and covers the same physical extent to
/// within one voxel; intensities are interpolated trilinearly. Resampling a
/// volume at its own isotropic spacing returns the data unchanged.
pub fn resample_isotropic(vol: &ScalarVolume, target: f64) -> Result<ScalarVolume> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidVolume(format!(
            "resample target must be positive, got {target}"
        )));
    }
    let g = vol.geometry;
    let out_dim = |n: usize, s: f64| -> usize {
        // nearest voxel count covering the same center-to-center extent
        ((n - 1) as f64 * s / target).round() as usize + 1
    };
    let dims = (
        out_dim(g.dims.0, g.spacing.0),
        out_dim(g.dims.1, g.spacing.1),
        out_dim(g.dims.2, g.spacing.2),
    );
    let geometry = Geometry::new(dims, (target, target, target), g.origin)?;
    let mut data = vec![0.0f32; geometry.num_voxels()];
    for z in 0..dims.2 {
        let w = z as f64 * target / g.spacing.2;
        for y in 0..dims.1 {
            let v = y as f64 * target / g.spacing.1;
            for x in 0..dims.0 {
                let u = x as f64 * target / g.spacing.0;
                data[geometry.linear(x, y, z)] = vol.sample_clamped(u, v, w) as f32;
            }
        }
    }
    ScalarVolume::new(geometry, data)
}

/// 3D grid of label IDs in `{0..=num_labels}`, 0 being background.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    pub geometry: Geometry,
    pub labels: Vec<u8>,
    /// Count of foreground structures; stored labels never exceed it.
    pub num_labels: u8,
}

impl LabelVolume {
    pub fn new(geometry: Geometry, labels: Vec<u8>, num_labels: u8) -> Result<Self> {
        if labels.len() != geometry.num_voxels() {
            return Err(Error::InvalidVolume(format!(
                "label length {} != voxel count {}",
                labels.len(),
                geometry.num_voxels()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > num_labels) {
            return Err(Error::InvalidVolume(format!(
                "label {bad} exceeds num_labels {num_labels}"
            )));
        }
        Ok(LabelVolume {
            geometry,
            labels,
            num_labels,
        })
    }

    pub fn background(geometry: Geometry, num_labels: u8) -> Self {
        let n = geometry.num_voxels();
        LabelVolume {
            geometry,
            labels: vec![0; n],
            num_labels,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.geometry.dims
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> u8 {
        self.labels[self.geometry.linear(x, y, z)]
    }

    /// Number of classes including background.
    pub fn num_classes(&self) -> usize {
        self.num_labels as usize + 1
    }
}

/// Per-voxel categorical distribution over `num_labels + 1` classes.
///
/// Channel-minor layout: `data[i * channels + s]` is the probability of
/// class `s` at voxel `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVolume {
    pub geometry: Geometry,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl ProbVolume {
    pub fn new(geometry: Geometry, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidVolume("channels must be >= 1".into()));
        }
        if data.len() != geometry.num_voxels() * channels {
            return Err(Error::InvalidVolume(format!(
                "data length {} != voxels x channels {}",
                data.len(),
                geometry.num_voxels() * channels
            )));
        }
        Ok(ProbVolume {
            geometry,
            channels,
            data,
        })
    }

    /// Uniform distribution over all channels.
    pub fn uniform(geometry: Geometry, channels: usize) -> Result<Self> {
        let p = 1.0 / channels as f32;
        let n = geometry.num_voxels() * channels;
        ProbVolume::new(geometry, channels, vec![p; n])
    }

    #[inline]
    pub fn row(&self, voxel: usize) -> &[f32] {
        &self.data[voxel * self.channels..(voxel + 1) * self.channels]
    }

    /// Checks every voxel's distribution: entries in [0, 1] and sum within
    /// `tol` of 1.
    pub fn validate_rows(&self, tol: f32) -> Result<()> {
        for i in 0..self.geometry.num_voxels() {
            let row = self.row(i);
            let mut sum = 0.0f32;
            for &p in row {
                if !(0.0..=1.0 + tol).contains(&p) {
                    return Err(Error::Numeric(format!(
                        "probability {p} at voxel {i} outside [0, 1]"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > tol {
                return Err(Error::Numeric(format!(
                    "voxel {i} distribution sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Per-voxel argmax with ties broken toward the smallest label index.
    pub fn argmax_labels(&self) -> Result<LabelVolume> {
        if self.channels > u8::MAX as usize + 1 {
            return Err(Error::ShapeMismatch(format!(
                "{} channels exceed the label range",
                self.channels
            )));
        }
        let labels = (0..self.geometry.num_voxels())
            .map(|i| argmax_row_f32(self.row(i)))
            .collect();
        LabelVolume::new(self.geometry, labels, (self.channels - 1) as u8)
    }
}

/// First index of the maximal entry (smallest-label tie-break).
#[inline]
pub(crate) fn argmax_row_f32(row: &[f32]) -> u8 {
    let mut best = 0usize;
    for (s, &p) in row.iter().enumerate().skip(1) {
        if p > row[best] {
            best = s;
        }
    }
    best as u8
}

#[inline]
pub(crate) fn argmax_row_f64(row: &[f64]) -> u8 {
    let mut best = 0usize;
    for (s, &p) in row.iter().enumerate().skip(1) {
        if p > row[best] {
            best = s;
        }
    }
    best as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_volume() -> ScalarVolume {
        // value = x + 10y + 100z on a 4x4x4 unit grid
        let geom = Geometry::isotropic((4, 4, 4), 1.0).unwrap();
        let mut data = vec![0.0f32; geom.num_voxels()];
        for z in 0..4 {
            for y in 0..4 {
                for x in 0..4 {
                    data[geom.linear(x, y, z)] = (x + 10 * y + 100 * z) as f32;
                }
            }
        }
        ScalarVolume::new(geom, data).unwrap()
    }

    #[test]
    fn linear_order_is_x_fastest() {
        let geom = Geometry::isotropic((3, 4, 5), 1.0).unwrap();
        assert_eq!(geom.linear(1, 0, 0), 1);
        assert_eq!(geom.linear(0, 1, 0), 3);
        assert_eq!(geom.linear(0, 0, 1), 12);
        for i in 0..geom.num_voxels() {
            let (x, y, z) = geom.unlinear(i);
            assert_eq!(geom.linear(x, y, z), i);
        }
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(Geometry::new((0, 4, 4), (1.0, 1.0, 1.0), (0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn nonpositive_spacing_rejected() {
        assert!(Geometry::new((4, 4, 4), (1.0, 0.0, 1.0), (0.0, 0.0, 0.0)).is_err());
        assert!(Geometry::new((4, 4, 4), (1.0, -0.5, 1.0), (0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn label_exceeding_num_labels_rejected() {
        let geom = Geometry::isotropic((2, 2, 2), 1.0).unwrap();
        assert!(LabelVolume::new(geom, vec![0, 1, 2, 3, 0, 0, 0, 0], 2).is_err());
    }

    #[test]
    fn sample_on_lattice_is_exact() {
        let vol = ramp_volume();
        for z in 0..4 {
            for y in 0..4 {
                for x in 0..4 {
                    let s = vol.sample_clamped(x as f64, y as f64, z as f64);
                    assert_eq!(s, vol.at(x, y, z) as f64);
                }
            }
        }
    }

    #[test]
    fn sample_reproduces_linear_ramp() {
        let vol = ramp_volume();
        // trilinear interpolation is exact on trilinear functions
        let s = vol.sample_clamped(1.5, 2.25, 0.75);
        let expect = 1.5 + 10.0 * 2.25 + 100.0 * 0.75;
        assert!((s - expect).abs() < 1e-9);
    }

    #[test]
    fn sample_clamps_to_edges() {
        let vol = ramp_volume();
        assert_eq!(vol.sample_clamped(-5.0, 0.0, 0.0), vol.at(0, 0, 0) as f64);
        assert_eq!(vol.sample_clamped(9.0, 9.0, 9.0), vol.at(3, 3, 3) as f64);
    }

    #[test]
    fn argmax_tie_breaks_to_lowest() {
        let geom = Geometry::isotropic((1, 1, 1), 1.0).unwrap();
        let pv = ProbVolume::new(geom, 3, vec![1.0 / 3.0; 3]).unwrap();
        assert_eq!(pv.argmax_labels().unwrap().labels, vec![0]);
        let pv = ProbVolume::new(geom, 3, vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(pv.argmax_labels().unwrap().labels, vec![1]);
    }

    #[test]
    fn validate_rows_catches_bad_distribution() {
        let geom = Geometry::isotropic((1, 1, 1), 1.0).unwrap();
        let pv = ProbVolume::new(geom, 2, vec![0.9, 0.3]).unwrap();
        assert!(pv.validate_rows(1e-6).is_err());
    }
}
