//! Published mean profits, exactly as printed.

pub struct Table {
    pub name: &'static str,
    pub params: [&'static str; 4],
    /// One row per ring size, columns in [1,1] [1,2] [1,3] [2,1] [2,2] [3,1] order.
    pub rows: &'static [(usize, [&'static str; 6])],
    pub limit: [&'static str; 6],
}

pub const TABLE_1: Table = Table {
    name: "toral",
    params: ["1", "4/25", "4/25", "7/10"],
    rows: &[
        (3, ["-0.00695879", "-0.02748212", "-0.04021572", "0.00067249", "-0.01487182", "0.00179203"]),
        (4, ["0.00877041", "0.02345828", "0.03569464", "0.00352220", "0.01011944", "0.00244238"]),
        (5, ["0.00466232", "0.00501198", "0.00434917", "0.00320648", "0.00465517", "0.00240873"]),
        (6, ["0.00497503", "0.00590528", "0.00513509", "0.00325099", "0.00498178", "0.00241857"]),
        (7, ["0.00496767", "0.00621483", "0.00637676", "0.00326314", "0.00497331", "0.00242540"]),
        (8, ["0.00494802", "0.00604194", "0.00599064", "0.00327193", "0.00495138", "0.00243115"]),
        (9, ["0.00493507", "0.00598135", "0.00588386", "0.00327802", "0.00493728", "0.00243582"]),
        (10, ["0.00492347", "0.00593756", "0.00584200", "0.00328237", "0.00492494", "0.00243961"]),
        (11, ["0.00491339", "0.00589846", "0.00578690", "0.00328558", "0.00491438", "0.00244272"]),
        (12, ["0.00490464", "0.00586697", "0.00574489", "0.00328800", "0.00490531", "0.00244529"]),
        (13, ["0.00489699", "0.00584063", "0.00571065", "0.00328986", "0.00489744", "0.00244745"]),
        (14, ["0.00489026", "0.00581820", "0.00568131", "0.00329133", "0.00489056", "0.00244927"]),
        (15, ["0.00488431", "0.00579891", "0.00565623", "0.00329249", "0.00488449", "0.00245083"]),
        (16, ["0.00487900", "0.00578213", "0.00563452", "0.00329343", "0.00487912", "0.00245217"]),
        (17, ["0.00487426", "0.00576740", "0.00561552", "0.00329420", "0.00487432", "0.00245334"]),
        (18, ["0.00486999", "0.00575438", "0.00559876", "0.00329483", "0.00487001", "0.00245437"]),
    ],
    limit: ["0.00479089", "0.00554084", "0.00532972", "0.00329853", "0.00479089", "0.00246903"],
};

pub const TABLE_2: Table = Table {
    name: "second",
    params: ["7/10", "17/25", "17/25", "0"],
    rows: &[
        (3, ["0.02224875", "0.04081923", "0.04914477", "0.01124438", "0.02978942", "0.00756605"]),
        (4, ["0.00771486", "0.00053987", "-0.00667489", "0.00804643", "0.00719297", "0.00668482"]),
        (5, ["0.00959590", "0.00896406", "0.00788233", "0.00808935", "0.00944220", "0.00660145"]),
        (6, ["0.00883530", "0.00657582", "0.00395457", "0.00787821", "0.00870056", "0.00649756"]),
        (7, ["0.00866607", "0.00674014", "0.00456448", "0.00774894", "0.00856648", "0.00641956"]),
        (8, ["0.00847909", "0.00646246", "0.00421207", "0.00764628", "0.00840151", "0.00635716"]),
        (9, ["0.00834684", "0.00633835", "0.00413293", "0.00756557", "0.00828507", "0.00630657"]),
        (10, ["0.00824074", "0.00622264", "0.00402604", "0.00750030", "0.00819047", "0.00626485"]),
        (11, ["0.00815521", "0.00613328", "0.00394982", "0.00744652", "0.00811356", "0.00622992"]),
        (12, ["0.00808457", "0.00605892", "0.00388449", "0.00740147", "0.00804952", "0.00620028"]),
        (13, ["0.00802529", "0.00599680", "0.00383017", "0.00736319", "0.00799540", "0.00617485"]),
        (14, ["0.00797483", "0.00594398", "0.00378377", "0.00733029", "0.00794905", "0.00615279"]),
        (15, ["0.00793135", "0.00589853", "0.00374381", "0.00730171", "0.00790890", "0.00613348"]),
        (16, ["0.00789351", "0.00585901", "0.00370899", "0.00727665", "0.00787378", "0.00611645"]),
        (17, ["0.00786027", "0.00582433", "0.00367839", "0.00725451", "0.00784280", "0.00610132"]),
        (18, ["0.00783085", "0.00579365", "0.00365129", "0.00723480", "0.00781528", "0.00608779"]),
    ],
    limit: ["0.00734784", "0.00529172", "0.00320388", "0.00689768", "0.00734784", "0.00584750"],
};

pub const TABLE_3: Table = Table {
    name: "interior",
    params: ["1/10", "3/5", "3/5", "3/4"],
    rows: &[
        (3, ["0.0064599", "-0.0113380", "-0.0305982", "0.00792562", "0.0013604", "0.00640450"]),
        (4, ["0.0143185", "0.0137926", "0.0079878", "0.00959254", "0.0141773", "0.00690030"]),
        (5, ["0.0154167", "0.0187545", "0.0174399", "0.00977539", "0.0153785", "0.00699045"]),
        (6, ["0.0155020", "0.0197053", "0.0197681", "0.00980464", "0.0154761", "0.00703029"]),
        (7, ["0.0154423", "0.0197654", "0.0202208", "0.00980993", "0.0154198", "0.00705342"]),
        (8, ["0.0153749", "0.0196547", "0.0201990", "0.00980937", "0.0153555", "0.00706817"]),
        (9, ["0.0153182", "0.0195309", "0.0200777", "0.00980683", "0.0153015", "0.00707811"]),
        (10, ["0.0152717", "0.0194237", "0.0199518", "0.00980357", "0.0152575", "0.00708508"]),
        (11, ["0.0152334", "0.0193346", "0.0198414", "0.00980014", "0.0152212", "0.00709014"]),
        (12, ["0.0152014", "0.0192605", "0.0197479", "0.00979677", "0.0151908", "0.00709392"]),
        (13, ["0.0151742", "0.0191982", "0.0196688", "0.00979356", "0.0151649", "0.00709679"]),
        (14, ["0.0151508", "0.0191452", "0.0196013", "0.00979055", "0.0151427", "0.00709903"]),
        (15, ["0.0151306", "0.0190994", "0.0195432", "0.00978777", "0.0151233", "0.00710080"]),
        (16, ["0.0151128", "0.0190596", "0.0194927", "0.00978519", "0.0151064", "0.00710221"]),
        (17, ["0.0150971", "0.0190246", "0.0194483", "0.00978280", "0.0150913", "0.00710337"]),
        (18, ["0.0150831", "0.0189936", "0.0194090", "0.00978060", "0.0150779", "0.00710431"]),
    ],
    limit: ["0.0148448", "0.0184829", "0.0187645", "0.00973219", "0.0148448", "0.00710942"],
};

pub const TABLES: [&Table; 3] = [&TABLE_1, &TABLE_2, &TABLE_3];

/// Half a unit in the last printed decimal place.
pub fn printed_tolerance(text: &str) -> f64 {
    let decimals = text.split_once('.').map_or(0, |(_, frac)| frac.len());
    0.5 * 10f64.powi(-(decimals as i32))
}
