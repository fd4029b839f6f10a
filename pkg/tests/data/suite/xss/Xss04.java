import javax.servlet.http.HttpServletRequest;
import javax.servlet.http.HttpServletResponse;

class Xss04 {
    void good(HttpServletRequest request, HttpServletResponse response) throws Exception {
        String id = request.getParameter("id");
        if (!id.matches("[0-9]+")) {
            return;
        }
        response.getWriter().format("item %s", id);
    }

    void bad(HttpServletRequest request, HttpServletResponse response) throws Exception {
        String q = request.getQueryString();
        String page = "results for " + q;
        response.getWriter().println(page);
    }
}
