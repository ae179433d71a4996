//! Standalone gnuplot scripts that read the emitted CSV files and render a
//! PNG next to them.

/// Heat map of the real part of a grid CSV (two comment lines and a header
/// precede the data).
pub fn spectrum_script(stem: &str, title: &str, unit1: &str, unit3: &str) -> String {
    format!(
        "# {title}\n\
         set terminal pngcairo size 820,720\n\
         set output '{stem}.png'\n\
         set datafile separator ','\n\
         set title '{title}'\n\
         set xlabel 'omega1 [{unit1}]'\n\
         set ylabel 'omega3 [{unit3}]'\n\
         set size square\n\
         set palette defined (-1 'blue', 0 'white', 1 'red')\n\
         set cbrange [-1:1]\n\
         plot '{stem}.csv' skip 3 using 1:2:3 with image notitle\n"
    )
}

/// All columns of a table CSV against its first column.
pub fn table_script(stem: &str, title: &str, columns: usize, log_y: bool) -> String {
    let log = if log_y { "set logscale y\n" } else { "" };
    format!(
        "# {title}\n\
         set terminal pngcairo size 900,600\n\
         set output '{stem}.png'\n\
         set datafile separator ','\n\
         set title '{title}'\n\
         set key outside right\n\
         {log}\
         plot for [k=2:{columns}] '{stem}.csv' skip 1 using 1:k with lines title columnheader(k)\n"
    )
}
