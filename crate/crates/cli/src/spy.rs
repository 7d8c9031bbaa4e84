use dpse_core::SparseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SpySummary {
    pub order: usize,
    pub ndyn: usize,
    pub nnz: usize,
    pub density_percent: f64,
    /// Nonzeros of `J1`, `J2`, `J3`, `J4`.
    pub blocks: [usize; 4],
}

pub fn summarize(j: &SparseMatrix, ndyn: usize) -> SpySummary {
    let n = j.nrows();
    let mut blocks = [0; 4];
    for (r, c, _) in j.triplets() {
        blocks[2 * usize::from(r >= ndyn) + usize::from(c >= ndyn)] += 1;
    }
    SpySummary {
        order: n,
        ndyn,
        nnz: j.nnz(),
        density_percent: 100.0 * j.nnz() as f64 / (n as f64 * j.ncols() as f64),
        blocks,
    }
}

/// Nonzero count implied by an order and a density in percent.
pub fn expected_nnz(order: usize, density_percent: f64) -> f64 {
    (order as f64).powi(2) * density_percent / 100.0
}

/// 1-based `(row, col)` of every stored entry, column by column.
pub fn coordinates(j: &SparseMatrix) -> Vec<(usize, usize)> {
    j.triplets().map(|(r, c, _)| (r + 1, c + 1)).collect()
}

impl SpySummary {
    pub fn to_text(&self) -> String {
        format!(
            "# N = {}\n# ndyn = {}\n# nnz = {}\n# density = {}%\n# J1 nnz = {}\n# J2 nnz = {}\n# J3 nnz = {}\n# J4 nnz = {}\n",
            self.order,
            self.ndyn,
            self.nnz,
            self.density_percent,
            self.blocks[0],
            self.blocks[1],
            self.blocks[2],
            self.blocks[3]
        )
    }
}

pub fn coordinates_csv(j: &SparseMatrix) -> String {
    let mut out = String::from("row,col\n");
    for (r, c) in coordinates(j) {
        out.push_str(&format!("{r},{c}\n"));
    }
    out
}
