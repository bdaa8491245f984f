use markedgc::enumerate::*;
fn main() {
    let limits = EnumerateLimits::default();
    for (r, l) in [(0usize, 5usize), (2, 4), (4, 3), (6, 2), (8, 1), (10, 0)] {
        let t = std::time::Instant::now();
        let a = enumerate_graphs(&FamilySpec { r, l, legs_labeled: false }, &limits).unwrap();
        let ta = t.elapsed();
        let t = std::time::Instant::now();
        let b = enumerate_graphs_oracle(&FamilySpec { r, l, legs_labeled: false }, &limits).unwrap();
        let tb = t.elapsed();
        println!("({r},{l}): |family| = {} / {}  gen {:?} oracle {:?}", a.len(), b.len(), ta, tb);
        assert_eq!(a.len(), b.len());
    }
}
