use crate::model::{Design, DesignDoc};

pub fn unit_cubes(n: usize, layer_limit: u32) -> Design {
    Design::from_doc(DesignDoc::boxes(&vec![(1.0, 1.0, 1); n], layer_limit)).unwrap()
}

pub fn boxes(dims: &[(f64, f64, u32)], layer_limit: u32) -> Design {
    Design::from_doc(DesignDoc::boxes(dims, layer_limit)).unwrap()
}
