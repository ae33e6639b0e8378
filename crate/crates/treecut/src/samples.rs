//! Built-in example profiles used by the self-test command and the test
//! suites.

use crate::newick::parse_newick;
use crate::tree::Profile;

/// Two trees on labels `a..g` that are compatible but admit no agreement
/// supertree: the only complete parallel cut families need a cut carrying
/// two edges of one input tree.
pub const COMPATIBLE_PAIR: [&str; 2] = ["(a,b,c,(f,(d,e)));", "(a,b,(c,(d,e,(f,g))));"];

/// Two trees on labels `a..f` that agree: an agreement supertree exists.
pub const AGREEING_PAIR: [&str; 2] = ["(a,b,(c,(d,e)));", "(a,b,(f,(c,d)));"];

pub fn compatible_pair() -> Profile {
    Profile::new(
        COMPATIBLE_PAIR
            .iter()
            .map(|s| parse_newick(s).expect("sample parses"))
            .collect(),
    )
    .expect("sample profile is valid")
}

pub fn agreeing_pair() -> Profile {
    Profile::new(
        AGREEING_PAIR
            .iter()
            .map(|s| parse_newick(s).expect("sample parses"))
            .collect(),
    )
    .expect("sample profile is valid")
}
