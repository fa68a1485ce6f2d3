//! Gnuplot scripts for the CSV outputs.

fn header(output: &str, xlabel: &str, ylabel: &str, logx: bool, logy: bool) -> String {
    let mut s = String::from("set datafile separator ','\nset datafile columnheaders\nset key left top\nset grid\n");
    s.push_str(&format!("set terminal pngcairo size 900,600\nset output '{output}'\n"));
    s.push_str(&format!("set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"));
    if logx {
        s.push_str("set logscale x\nset format x '10^{%L}'\n");
    }
    if logy {
        s.push_str("set logscale y\n");
    }
    s
}

pub fn mass_scaling(qs: &[f64]) -> String {
    let mut s = header("mass_scaling.png", "lambda", "lambda^{...} int |u|^q", true, false);
    let plots: Vec<String> = qs
        .iter()
        .map(|q| format!("'mass_scaling.csv' using ($1=={q} ? $2 : 1/0):4 with linespoints title 'q = {q}'"))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

pub fn mass_curve(predicted: Option<f64>) -> String {
    let mut s = header("mass.png", "lambda", "||u||_2", true, true);
    match predicted {
        Some(k) => {
            s.push_str("stats 'envelope.csv' every ::0::0 using 1:2 nooutput prefix 'A'\n");
            s.push_str(&format!("ref(x) = A_min_y * (x / A_min_x)**({k})\n"));
            s.push_str(&format!(
                "plot 'envelope.csv' using 1:2 with linespoints title 'envelope', \\\n     \
                 ref(x) with lines lt 0 title 'slope {k}'\n"
            ));
        }
        None => s.push_str("plot 'envelope.csv' using 1:2 with linespoints title 'envelope'\n"),
    }
    s
}

pub fn decay() -> String {
    let mut s = header("decay.png", "lambda", "slope / sqrt(lambda)", true, false);
    s.push_str(
        "plot 'decay.csv' using 1:($2/sqrt($1)) with linespoints title 'fitted', \\\n     \
         -0.5 title 'bound' with lines lt 0, -1 title 'exact' with lines lt 2\n",
    );
    s
}

pub fn barrier() -> String {
    let mut s = header("barrier.png", "distance to centers", "phi", false, true);
    s.push_str("plot 'barrier.csv' using 3:4 with points pt 7 ps 0.3 title 'phi'\n");
    s
}

pub fn profile() -> String {
    let mut s = header("profile.png", "y", "rescaled u", false, false);
    s.push_str("plot 'profile.csv' using 2:3:1 with points pt 7 ps 0.3 lc variable title 'branches'\n");
    s
}
