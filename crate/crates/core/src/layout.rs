//! Sensor geometry: mount type, detector grid, ROI definitions and the
//! human-editable layout file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signature::build_geometric_masks;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mount {
    /// Array in a vertical plane looking inward; ROIs are angular access
    /// areas at azimuth `aoa_deg`.
    Wall,
    /// Array facing down from the ceiling; ROIs are floor cells at
    /// `footprint_m`.
    Ceiling,
}

/// One region of interest: a binary detector mask plus its geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiSpec {
    pub index: usize,
    /// Binary detector selector b_k, length M.
    pub mask: Vec<bool>,
    /// Azimuth of the access area (wall mounts).
    pub aoa_deg: Option<f64>,
    /// 2-D floor footprint of the cell centre (ceiling mounts).
    pub footprint_m: Option<[f64; 2]>,
    /// Per-ROI signature-extraction threshold τ_k in °C.
    pub tau_c: f64,
}

impl RoiSpec {
    /// Detector indices selected by the mask, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(m, &b)| b.then_some(m))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorLayout {
    pub mount: Mount,
    /// Detector rows × cols, row-major in frames. rows·cols = M.
    pub rows: usize,
    pub cols: usize,
    pub fov_deg: f64,
    /// Range bounds for distance tracking (wall mounts).
    pub d_min_m: Option<f64>,
    pub d_max_m: Option<f64>,
    /// Mount height above the floor (ceiling mounts).
    pub height_m: Option<f64>,
    /// Edge length of one ROI floor cell (ceiling mounts).
    pub roi_cell_m: Option<f64>,
    pub rois: Vec<RoiSpec>,
}

impl SensorLayout {
    pub fn detectors(&self) -> usize {
        self.rows * self.cols
    }

    pub fn roi_count(&self) -> usize {
        self.rois.len()
    }

    /// Azimuth of a detector column centre: a linear map of the column
    /// index across the field of view, 0° at boresight.
    pub fn column_azimuth_deg(&self, col: usize) -> f64 {
        -self.fov_deg / 2.0 + self.fov_deg * (col as f64 + 0.5) / self.cols as f64
    }

    /// Floor projection of a detector centre for ceiling mounts.
    pub fn detector_floor_xy(&self, row: usize, col: usize) -> Result<[f64; 2]> {
        let h = self.height()?;
        let w = 2.0 * h * (self.fov_deg.to_radians() / 2.0).tan();
        let x = -w / 2.0 + w * (col as f64 + 0.5) / self.cols as f64;
        let y = -w / 2.0 + w * (row as f64 + 0.5) / self.rows as f64;
        Ok([x, y])
    }

    pub fn distance_bounds(&self) -> Result<(f64, f64)> {
        match (self.d_min_m, self.d_max_m) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Layout("wall layout requires d_min_m and d_max_m".into())),
        }
    }

    pub fn height(&self) -> Result<f64> {
        self.height_m
            .ok_or_else(|| Error::Layout("ceiling layout requires height_m".into()))
    }

    pub fn roi_cell(&self) -> Result<f64> {
        self.roi_cell_m
            .ok_or_else(|| Error::Layout("ceiling layout requires roi_cell_m".into()))
    }

    /// Angular sector [lo, hi) owned by each wall ROI: boundaries at the
    /// midpoints between adjacent AOAs, extended to ±FOV/2 at the ends.
    pub fn wall_sectors(&self) -> Result<Vec<(f64, f64)>> {
        if self.mount != Mount::Wall {
            return Err(Error::Usage("wall_sectors on a non-wall layout".into()));
        }
        let mut aoas = Vec::with_capacity(self.rois.len());
        for r in &self.rois {
            aoas.push(
                r.aoa_deg
                    .ok_or_else(|| Error::Layout(format!("ROI {} lacks aoa_deg", r.index)))?,
            );
        }
        let half = self.fov_deg / 2.0;
        let mut order: Vec<usize> = (0..aoas.len()).collect();
        order.sort_by(|&a, &b| aoas[a].partial_cmp(&aoas[b]).unwrap());
        let mut sectors = vec![(0.0, 0.0); aoas.len()];
        for (rank, &k) in order.iter().enumerate() {
            let lo = if rank == 0 {
                -half
            } else {
                (aoas[order[rank - 1]] + aoas[k]) / 2.0
            };
            let hi = if rank == order.len() - 1 {
                half
            } else {
                (aoas[k] + aoas[order[rank + 1]]) / 2.0
            };
            sectors[k] = (lo, hi);
        }
        Ok(sectors)
    }

    /// Standard wall layout: 8×8 grid, 60° FOV, ROIs at the given AOAs.
    pub fn wall(aoas_deg: &[f64], tau_c: f64, d_min_m: f64, d_max_m: f64) -> Result<Self> {
        let mut layout = SensorLayout {
            mount: Mount::Wall,
            rows: 8,
            cols: 8,
            fov_deg: 60.0,
            d_min_m: Some(d_min_m),
            d_max_m: Some(d_max_m),
            height_m: None,
            roi_cell_m: None,
            rois: aoas_deg
                .iter()
                .enumerate()
                .map(|(k, &a)| RoiSpec {
                    index: k,
                    mask: Vec::new(),
                    aoa_deg: Some(a),
                    footprint_m: None,
                    tau_c,
                })
                .collect(),
        };
        layout.fill_masks()?;
        layout.validate()?;
        Ok(layout)
    }

    /// The five-area wall configuration used throughout the evaluation:
    /// AOAs {-30, -18, 0, 18, 30}°, τ = 0.8 °C, range 0.25–3.5 m.
    pub fn wall_default() -> Self {
        Self::wall(&[-30.0, -18.0, 0.0, 18.0, 30.0], 0.8, 0.25, 3.5)
            .expect("default wall layout is valid")
    }

    /// Standard ceiling layout: 8×8 grid, 60° FOV, ROI cells at the given
    /// floor footprints.
    pub fn ceiling(
        footprints_m: &[[f64; 2]],
        tau_c: f64,
        height_m: f64,
        roi_cell_m: f64,
    ) -> Result<Self> {
        let mut layout = SensorLayout {
            mount: Mount::Ceiling,
            rows: 8,
            cols: 8,
            fov_deg: 60.0,
            d_min_m: None,
            d_max_m: None,
            height_m: Some(height_m),
            roi_cell_m: Some(roi_cell_m),
            rois: footprints_m
                .iter()
                .enumerate()
                .map(|(k, &xy)| RoiSpec {
                    index: k,
                    mask: Vec::new(),
                    aoa_deg: None,
                    footprint_m: Some(xy),
                    tau_c,
                })
                .collect(),
        };
        layout.fill_masks()?;
        layout.validate()?;
        Ok(layout)
    }

    /// K = 12 cells on a regular 0.5 m grid (4 × 3), τ = 0.4 °C, 3 m ceiling.
    pub fn ceiling_default() -> Self {
        let mut cells = Vec::new();
        for &y in &[-0.5, 0.0, 0.5] {
            for &x in &[-0.75, -0.25, 0.25, 0.75] {
                cells.push([x, y]);
            }
        }
        Self::ceiling(&cells, 0.4, 3.0, 0.5).expect("default ceiling layout is valid")
    }

    /// Computes masks for every ROI that does not carry an explicit one.
    pub fn fill_masks(&mut self) -> Result<()> {
        let masks = build_geometric_masks(self)?;
        for (roi, mask) in self.rois.iter_mut().zip(masks) {
            if roi.mask.is_empty() {
                roi.mask = mask;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.detectors();
        if m == 0 {
            return Err(Error::Layout("detector grid is empty".into()));
        }
        let k = self.roi_count();
        if k == 0 {
            return Err(Error::Layout("layout defines no ROI".into()));
        }
        if k > m {
            return Err(Error::Layout(format!("K = {k} exceeds detector count M = {m}")));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(Error::Layout(format!("fov_deg {} out of range", self.fov_deg)));
        }
        match self.mount {
            Mount::Wall => {
                let (lo, hi) = self.distance_bounds()?;
                if !(lo > 0.0 && lo < hi) {
                    return Err(Error::Layout(format!(
                        "distance bounds must satisfy 0 < d_min < d_max, got [{lo}, {hi}]"
                    )));
                }
                for r in &self.rois {
                    let a = r
                        .aoa_deg
                        .ok_or_else(|| Error::Layout(format!("ROI {} lacks aoa_deg", r.index)))?;
                    if a.abs() > self.fov_deg / 2.0 {
                        return Err(Error::Layout(format!(
                            "ROI {} AOA {a}° is outside the ±{}° FOV",
                            r.index,
                            self.fov_deg / 2.0
                        )));
                    }
                }
            }
            Mount::Ceiling => {
                let h = self.height()?;
                if h <= 0.0 {
                    return Err(Error::Layout("height_m must be positive".into()));
                }
                if self.roi_cell()? <= 0.0 {
                    return Err(Error::Layout("roi_cell_m must be positive".into()));
                }
                for r in &self.rois {
                    r.footprint_m.ok_or_else(|| {
                        Error::Layout(format!("ROI {} lacks footprint_m", r.index))
                    })?;
                }
            }
        }
        let mut union = false;
        for r in &self.rois {
            if r.mask.len() != m {
                return Err(Error::Layout(format!(
                    "ROI {} mask length {} does not match M = {m}",
                    r.index,
                    r.mask.len()
                )));
            }
            if !r.mask.iter().any(|&b| b) {
                return Err(Error::Layout(format!("ROI {} mask is all-zero", r.index)));
            }
            if r.tau_c <= 0.0 {
                return Err(Error::Layout(format!("ROI {} τ must be positive", r.index)));
            }
            union = true;
        }
        if !union {
            return Err(Error::Layout("union of ROI masks is empty".into()));
        }
        Ok(())
    }

    pub fn footprints(&self) -> Result<Vec<[f64; 2]>> {
        self.rois
            .iter()
            .map(|r| {
                r.footprint_m
                    .ok_or_else(|| Error::Layout(format!("ROI {} lacks footprint_m", r.index)))
            })
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: LayoutFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("layout file: {e}")))?;
        file.into_layout()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(&LayoutFile::from_layout(self))
            .map_err(|e| Error::Config(format!("layout file: {e}")))
    }
}

/// On-disk layout schema. Masks are optional; missing ones are derived from
/// the geometry.
#[derive(Debug, Serialize, Deserialize)]
struct LayoutFile {
    mount: Mount,
    #[serde(default = "default_grid")]
    rows: usize,
    #[serde(default = "default_grid")]
    cols: usize,
    #[serde(default = "default_fov")]
    fov_deg: f64,
    d_min_m: Option<f64>,
    d_max_m: Option<f64>,
    height_m: Option<f64>,
    roi_cell_m: Option<f64>,
    /// Default τ for ROIs that do not override it.
    tau_c: Option<f64>,
    #[serde(rename = "roi")]
    rois: Vec<RoiFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RoiFile {
    aoa_deg: Option<f64>,
    footprint_m: Option<[f64; 2]>,
    tau_c: Option<f64>,
    /// Explicit detector mask as 0/1 values, row-major.
    mask: Option<Vec<u8>>,
}

fn default_grid() -> usize {
    8
}

fn default_fov() -> f64 {
    60.0
}

impl LayoutFile {
    fn into_layout(self) -> Result<SensorLayout> {
        let default_tau = self.tau_c.unwrap_or(match self.mount {
            Mount::Wall => 0.8,
            Mount::Ceiling => 0.4,
        });
        let mut layout = SensorLayout {
            mount: self.mount,
            rows: self.rows,
            cols: self.cols,
            fov_deg: self.fov_deg,
            d_min_m: self.d_min_m,
            d_max_m: self.d_max_m,
            height_m: self.height_m,
            roi_cell_m: self.roi_cell_m,
            rois: Vec::with_capacity(self.rois.len()),
        };
        for (k, r) in self.rois.into_iter().enumerate() {
            let mask = match r.mask {
                Some(bits) => {
                    if bits.len() != layout.detectors() {
                        return Err(Error::Config(format!(
                            "ROI {k}: explicit mask length {} != M = {}",
                            bits.len(),
                            layout.detectors()
                        )));
                    }
                    bits.into_iter().map(|b| b != 0).collect()
                }
                None => Vec::new(),
            };
            layout.rois.push(RoiSpec {
                index: k,
                mask,
                aoa_deg: r.aoa_deg,
                footprint_m: r.footprint_m,
                tau_c: r.tau_c.unwrap_or(default_tau),
            });
        }
        layout.fill_masks()?;
        layout.validate()?;
        Ok(layout)
    }

    fn from_layout(l: &SensorLayout) -> Self {
        LayoutFile {
            mount: l.mount,
            rows: l.rows,
            cols: l.cols,
            fov_deg: l.fov_deg,
            d_min_m: l.d_min_m,
            d_max_m: l.d_max_m,
            height_m: l.height_m,
            roi_cell_m: l.roi_cell_m,
            tau_c: None,
            rois: l
                .rois
                .iter()
                .map(|r| RoiFile {
                    aoa_deg: r.aoa_deg,
                    footprint_m: r.footprint_m,
                    tau_c: Some(r.tau_c),
                    mask: Some(r.mask.iter().map(|&b| u8::from(b)).collect()),
                })
                .collect(),
        }
    }
}
