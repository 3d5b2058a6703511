use orbitsched::bench::{cell_seed};
use orbitsched::scenario::{self};
use orbitsched::solvers::{self, SolverSettings};
use orbitsched::smdp::SmdpConfig;

fn main() {
    let mut sums = [0.0f64; 4];
    for sample in 0..6usize {
        let seed = cell_seed(0, 200, sample);
        let mut s = scenario::generate(200, seed, 86_400.0, vec![]);
        s.opportunities = s.compute_opportunities();
        let config = SmdpConfig::default();
        let names = ["bnb", "graph", "forward", "rule"];
        print!("sample {sample}: ");
        for (i, name) in names.iter().enumerate() {
            let plan = solvers::run_solver(&SolverSettings::named(name), &s, false).unwrap();
            let cr = plan.collect_reward(&s, &config);
            sums[i] += cr;
            print!("{name}={cr:.0}/{:.1}({:.2}s) ", plan.total_reward, plan.wall_time_s);
        }
        println!();
    }
    println!("mean images: bnb={:.1} graph={:.1} forward={:.1} rule={:.1}",
        sums[0]/6.0, sums[1]/6.0, sums[2]/6.0, sums[3]/6.0);
}
